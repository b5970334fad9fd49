"""Independent reference solvers for small instances.

``brute_force_optimal`` enumerates every single-source assignment with a
depth-first search and ``full_master_lp`` builds the complete allocation
master by listing every robust-feasible customer subset.  Neither shares
code with the branch-and-price path beyond the instance model and the LP
engine.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .lp import LinearProgram
from .model import Instance

BRUTE_FORCE_LIMIT = 2 * 10**7
FULL_MASTER_LIMIT = 12


@dataclass
class OracleResult:
    objective: float  # inf when infeasible
    facility_of: list | None
    nodes: int = 0


def brute_force_optimal(inst: Instance) -> OracleResult:
    """Exact optimum by exhaustive search with cost pruning."""
    m, n = inst.m, inst.n
    if m**n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"{m}^{n} assignments exceed the enumeration limit")
    c = np.asarray(inst.assign_cost, dtype=np.int64)
    f = list(inst.fixed_cost)
    d, b, g, s = inst.demand, inst.deviation, inst.gamma, inst.capacity
    # customers by decreasing demand: capacity conflicts show up early
    order = sorted(range(n), key=lambda j: (-d[j], j))
    cheapest = [int(c[:, j].min()) for j in order]
    tail = [0] * (n + 1)
    for t in range(n - 1, -1, -1):
        tail[t] = tail[t + 1] + cheapest[t]

    nominal = [0] * m
    devs: list[list[int]] = [[] for _ in range(m)]
    count = [0] * m
    assign = [-1] * n
    best = [math.inf, None]
    visits = [0]

    def load(i):
        top = sorted(devs[i], reverse=True)[: g[i]]
        return nominal[i] + sum(top)

    def dfs(t, cost):
        visits[0] += 1
        if cost + tail[t] >= best[0]:
            return
        if t == n:
            best[0], best[1] = cost, list(assign)
            return
        j = order[t]
        for i in range(m):
            extra = int(c[i, j]) + (f[i] if count[i] == 0 else 0)
            nominal[i] += d[j]
            devs[i].append(b[j])
            if load(i) <= s[i]:
                count[i] += 1
                assign[j] = i
                dfs(t + 1, cost + extra)
                count[i] -= 1
                assign[j] = -1
            nominal[i] -= d[j]
            devs[i].pop()

    dfs(0, 0)
    return OracleResult(best[0], best[1], visits[0])


def feasible_subsets(inst: Instance, i: int):
    """Every customer subset that fits facility ``i`` under the worst case (empty set excluded)."""
    n = inst.n
    d, b, g, s = inst.demand, inst.deviation, inst.gamma[i], inst.capacity[i]
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            nominal = sum(d[j] for j in subset)
            if nominal > s:
                continue
            top = sorted((b[j] for j in subset), reverse=True)[:g]
            if nominal + sum(top) <= s:
                yield subset


def full_master_lp(inst: Instance) -> float:
    """LP value of the complete allocation master (inf if infeasible)."""
    if inst.n > FULL_MASTER_LIMIT:
        raise ValueError(f"n={inst.n} exceeds the full enumeration limit")
    m, n = inst.m, inst.n
    lp = LinearProgram([">="] * (n + m), [1.0] * n + [-1.0] * m)
    costs, cols = [], []
    for i in range(m):
        row = inst.assign_cost[i]
        for subset in feasible_subsets(inst, i):
            vec = np.zeros(n + m)
            vec[list(subset)] = 1.0
            vec[n + i] = -1.0
            costs.append(inst.fixed_cost[i] + sum(row[j] for j in subset))
            cols.append(vec)
    if not cols:
        return math.inf
    coefs = np.array(cols).T
    lp.add_columns(costs, coefs)
    sol = lp.solve()
    if sol.status == "infeasible":
        return math.inf
    if sol.status != "optimal":
        raise RuntimeError(f"full master LP ended with status {sol.status}")
    return sol.objective
