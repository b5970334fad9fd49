"""Per-facility pricing by robust knapsack."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .knapsack import RbkpProblem, solve_rbkp
from .master import DualPrices, FixSet
from .model import Instance

RC_TOL = 1e-6


@dataclass
class PricingResult:
    facility: int
    xi: float
    best_set: tuple
    reduced_cost: float
    extra_sets: tuple = ()


def _problem(inst: Instance, i: int, lam, allowed, forced=None) -> RbkpProblem:
    row = inst.assign_cost[i]
    return RbkpProblem(
        profits=[float(lam[j]) - row[j] for j in allowed],
        weights=[inst.demand[j] for j in allowed],
        deviations=[inst.deviation[j] for j in allowed],
        capacity=inst.capacity[i],
        budget=inst.gamma[i],
        ids=list(allowed),
        forced_in=forced,
    )


def _allowed(inst: Instance, i: int, masked) -> list[int]:
    if masked is None:
        return list(range(inst.n))
    masked = set(masked)
    return [j for j in range(inst.n) if j not in masked]


def price_facility(inst: Instance, i: int, duals: DualPrices, masked=None, multi_column: bool = False) -> PricingResult:
    """Most negative reduced-cost column of facility ``i``.

    ``masked`` lists customers whose assignment to ``i`` is fixed to zero;
    they are left out of the knapsack.
    """
    problem = _problem(inst, i, duals.lam, _allowed(inst, i, masked))
    xi, chosen = solve_rbkp(problem, collect=multi_column)
    rc = -xi + inst.fixed_cost[i] + float(duals.mu[i])
    extra = ()
    if multi_column:
        # other l-subproblem optima that also price out
        threshold = inst.fixed_cost[i] + float(duals.mu[i]) + RC_TOL
        extra = tuple(sorted({tuple(sorted(s)) for v, s in problem.candidates if v > threshold and s != chosen}))
    return PricingResult(i, xi, tuple(sorted(chosen)), rc, extra)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("RSSCFLP_THREADS", "1")))
    except ValueError:
        return 1


def price_all(inst: Instance, duals: DualPrices, fixes: FixSet, multi_column: bool = False):
    """Price every facility not fixed closed.

    Returns ``(columns, results)``: the new columns ``(i, R)`` with reduced
    cost below ``-RC_TOL`` (at most one per facility unless ``multi_column``)
    and the pricing result of every priced facility, in facility order.
    """
    masks: dict[int, list[int]] = {}
    for i, j in fixes.forbidden:
        masks.setdefault(i, []).append(j)
    facilities = [i for i in range(inst.m) if i not in fixes.closed]

    def work(i):
        return price_facility(inst, i, duals, masks.get(i), multi_column)

    threads = min(_threads(), len(facilities))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, facilities))
    else:
        results = [work(i) for i in facilities]
    columns = []
    for res in results:
        if res.reduced_cost < -RC_TOL:
            columns.append((res.facility, res.best_set))
            columns.extend((res.facility, s) for s in res.extra_sets)
    return columns, results


def xi_forced(inst: Instance, i: int, j: int, duals: DualPrices, masked=None) -> float:
    """Pricing optimum of facility ``i`` with customer ``j`` forced in (-inf if impossible)."""
    allowed = _allowed(inst, i, masked)
    if j not in allowed:
        raise ValueError(f"customer {j} is masked at facility {i}")
    value, _ = solve_rbkp(_problem(inst, i, duals.lam, allowed, forced=j))
    return value


def reduced_cost(inst: Instance, i: int, customers, duals: DualPrices) -> float:
    """Reduced cost of column (i, R) recomputed from scratch."""
    return float(sum(inst.assign_cost[i][j] - duals.lam[j] for j in customers) + inst.fixed_cost[i] + duals.mu[i])

