"""Exact 0/1 knapsack and robust 0/1 knapsack under a deviation budget.

The robust problem maximizes ``sum p_j x_j`` subject to
``sum d_j x_j + (sum of the budget largest b_j among chosen) <= s``.
Sorting items by nonincreasing deviation ``b_(1) >= ... >= b_(k)`` and
appending ``b_(k+1) = 0``, the feasible set is the union over
``l in {budget, ..., k-1, k+1}`` of the nominal knapsack sets with weights
``d_j + max(b_j - b_(l), 0)`` for the first ``l`` sorted items, ``d_j`` for
the rest, and capacity ``s - budget * b_(l)``.  Each piece is a plain
knapsack solved by dynamic programming over integer capacity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

NEG_INF = -math.inf


@dataclass(frozen=True)
class BkpItem:
    profit: float
    weight: int
    id: Hashable


@dataclass
class RbkpProblem:
    profits: Sequence[float]
    weights: Sequence[int]  # nominal d_j
    deviations: Sequence[int]  # b_j
    capacity: int
    budget: int
    ids: Sequence[Hashable] | None = None
    forced_in: Hashable | None = None
    # filled by solve_rbkp when collect=True: best set per l-subproblem
    candidates: list = field(default_factory=list, repr=False)


def _knapsack_dp(profits: np.ndarray, weights: np.ndarray, capacity: int) -> tuple[float, list[int]]:
    """Max-profit subset (positions) with total weight <= capacity."""
    if capacity < 0:
        return 0.0, []
    cap = int(capacity)
    dp = np.zeros(cap + 1)
    k = len(profits)
    keep = np.zeros((k, cap + 1), dtype=bool)
    for t in range(k):
        w = int(weights[t])
        if w > cap:
            continue
        cand = dp[: cap + 1 - w] + profits[t]
        better = cand > dp[w:]
        keep[t, w:] = better
        dp[w:] = np.where(better, cand, dp[w:])
    chosen = []
    c = cap
    for t in range(k - 1, -1, -1):
        if keep[t, c]:
            chosen.append(t)
            c -= int(weights[t])
    chosen.reverse()
    return float(dp[cap]), chosen


def solve_bkp(items: Sequence[BkpItem], capacity: int) -> tuple[float, frozenset]:
    if capacity < 0 or not items:
        return 0.0, frozenset()
    profits = np.array([it.profit for it in items], dtype=float)
    weights = np.array([it.weight for it in items], dtype=np.int64)
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    _, pos = _knapsack_dp(profits, weights, capacity)
    chosen = frozenset(items[t].id for t in pos)
    return float(sum(items[t].profit for t in pos)), chosen


def robust_load(weights, deviations, budget: int) -> int:
    """Nominal weight plus the ``budget`` largest deviations."""
    devs = sorted(deviations, reverse=True)
    return int(sum(weights)) + int(sum(devs[:budget])) if budget > 0 else int(sum(weights))


def solve_rbkp(problem: RbkpProblem, collect: bool = False) -> tuple[float, frozenset]:
    """Exact robust knapsack optimum and an optimal id set.

    Items with nonpositive profit are dropped unless forced.  With
    ``forced_in`` the item is part of every subproblem regardless of its
    profit; if it does not fit in any of them the value is ``-inf``.
    """
    n_all = len(problem.profits)
    ids = list(problem.ids) if problem.ids is not None else list(range(n_all))
    if not (len(problem.weights) == len(problem.deviations) == len(ids) == n_all):
        raise ValueError("item arrays differ in length")
    if problem.budget < 0:
        raise ValueError("budget must be nonnegative")
    forced = problem.forced_in
    if forced is not None and forced not in ids:
        raise ValueError(f"forced item {forced!r} not among the items")
    keep = [t for t in range(n_all) if problem.profits[t] > 0 or ids[t] == forced]
    # sort by nonincreasing deviation; ties by original position for determinism
    keep.sort(key=lambda t: (-problem.deviations[t], t))
    k = len(keep)
    profits = np.array([problem.profits[t] for t in keep], dtype=float)
    d = np.array([problem.weights[t] for t in keep], dtype=np.int64)
    b = np.array([problem.deviations[t] for t in keep], dtype=np.int64)
    fpos = keep.index(ids.index(forced)) if forced is not None else -1
    g = min(problem.budget, k)
    s = int(problem.capacity)

    if g == 0:
        levels = [(d, s)]
    else:
        levels = []
        for l in [*range(g, k), k + 1]:
            bl = int(b[l - 1]) if l <= k else 0
            w = d.copy()
            w[:l] += b[:l] - bl
            levels.append((w, s - g * bl))

    best_val, best_pos = NEG_INF, None
    others = np.array([t for t in range(k) if t != fpos], dtype=np.int64)
    for w, cap in levels:
        if fpos >= 0:
            cap -= int(w[fpos])
        if cap < 0:
            continue
        _, pos = _knapsack_dp(profits[others], w[others], cap)
        chosen = sorted([int(others[t]) for t in pos] + ([fpos] if fpos >= 0 else []))
        val = float(sum(profits[t] for t in chosen))
        if collect:
            problem.candidates.append((val, frozenset(ids[keep[t]] for t in chosen)))
        if val > best_val:
            best_val, best_pos = val, chosen
    if best_pos is None:
        return NEG_INF, frozenset()
    load = robust_load(d[best_pos], b[best_pos], problem.budget)
    if load > s:
        raise AssertionError(f"robust knapsack returned an infeasible set (load {load} > {s})")
    return best_val, frozenset(ids[keep[t]] for t in best_pos)
