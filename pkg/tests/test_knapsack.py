import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from rsscflp.knapsack import BkpItem, RbkpProblem, robust_load, solve_bkp, solve_rbkp


def brute_rbkp(profits, d, b, s, g, forced=None):
    best = -math.inf
    n = len(profits)
    for mask in range(1 << n):
        sel = [j for j in range(n) if mask >> j & 1]
        if forced is not None and forced not in sel:
            continue
        if robust_load([d[j] for j in sel], [b[j] for j in sel], g) <= s:
            best = max(best, sum(profits[j] for j in sel))
    return best


def test_bkp_example():
    items = [BkpItem(p, w, k) for k, (p, w) in enumerate(zip([6, 10, 12], [1, 2, 3]))]
    assert solve_bkp(items, 5) == (22.0, frozenset({1, 2}))


def test_bkp_edges():
    items = [BkpItem(3, 1, "a"), BkpItem(4, 2, "b")]
    assert solve_bkp(items, 0) == (0.0, frozenset())
    assert solve_bkp(items, -3) == (0.0, frozenset())
    assert solve_bkp([BkpItem(7, 2, 0)], 2) == (7.0, frozenset({0}))


def test_rbkp_example():
    prob = RbkpProblem([5, 4, 3], [4, 3, 2], [2, 1, 1], capacity=7, budget=1)
    assert solve_rbkp(prob) == (7.0, frozenset({1, 2}))


def test_rbkp_extreme_budgets():
    p, d, b = [9, 7, 5, 4, 3], [5, 4, 3, 3, 2], [3, 2, 2, 1, 1]
    nominal = solve_bkp([BkpItem(p[j], d[j], j) for j in range(5)], 11)[0]
    assert solve_rbkp(RbkpProblem(p, d, b, 11, 0))[0] == nominal
    full = solve_bkp([BkpItem(p[j], d[j] + b[j], j) for j in range(5)], 11)[0]
    assert solve_rbkp(RbkpProblem(p, d, b, 11, 5))[0] == full


def test_forced_item():
    p, d, b = [5, -2, 3], [4, 3, 2], [2, 1, 1]
    val, chosen = solve_rbkp(RbkpProblem(p, d, b, 7, 1, forced_in=1))
    assert 1 in chosen and val == brute_rbkp(p, d, b, 7, 1, forced=1)
    # a single infeasible forced item
    val, chosen = solve_rbkp(RbkpProblem([4], [5], [3], 7, 1, forced_in=0))
    assert val == -math.inf and chosen == frozenset()
    # negative profit alone still counts
    assert solve_rbkp(RbkpProblem([-3], [2], [1], 7, 1, forced_in=0))[0] == -3


def test_ids_are_returned():
    prob = RbkpProblem([5, 4, 3], [4, 3, 2], [2, 1, 1], 7, 1, ids=["x", "y", "z"])
    assert solve_rbkp(prob)[1] == frozenset({"y", "z"})


def test_collect_candidates_are_feasible():
    prob = RbkpProblem([5, 4, 3, 6], [4, 3, 2, 5], [2, 1, 1, 3], 10, 2)
    best, _ = solve_rbkp(prob, collect=True)
    assert prob.candidates and max(v for v, _ in prob.candidates) == best
    for v, sel in prob.candidates:
        sel = sorted(sel)
        assert robust_load([prob.weights[j] for j in sel], [prob.deviations[j] for j in sel], 2) <= 10


problems = st.integers(1, 9).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-10, 30), min_size=n, max_size=n),
        st.lists(st.integers(0, 12), min_size=n, max_size=n),
        st.lists(st.integers(0, 6), min_size=n, max_size=n),
        st.integers(0, 40),
        st.integers(0, n),
    )
)


@settings(max_examples=300, deadline=None)
@given(problems)
def test_rbkp_matches_enumeration(args):
    p, d, b, s, g = args
    val, chosen = solve_rbkp(RbkpProblem(p, d, b, s, g))
    assert val == max(0, brute_rbkp(p, d, b, s, g))
    sel = sorted(chosen)
    assert sum(p[j] for j in sel) == val
    assert robust_load([d[j] for j in sel], [b[j] for j in sel], g) <= s


@settings(max_examples=150, deadline=None)
@given(problems, st.data())
def test_rbkp_forced_matches_enumeration(args, data):
    p, d, b, s, g = args
    j = data.draw(st.integers(0, len(p) - 1))
    val, chosen = solve_rbkp(RbkpProblem(p, d, b, s, g, forced_in=j))
    assert val == brute_rbkp(p, d, b, s, g, forced=j)
    if val > -math.inf:
        assert j in chosen


@settings(max_examples=100, deadline=None)
@given(problems)
def test_rbkp_monotone(args):
    p, d, b, s, g = args
    v = solve_rbkp(RbkpProblem(p, d, b, s, g))[0]
    if g < len(p):
        assert solve_rbkp(RbkpProblem(p, d, b, s, g + 1))[0] <= v
    assert solve_rbkp(RbkpProblem(p, d, b, s + 3, g))[0] >= v


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_rbkp(RbkpProblem([1, 2], [1], [0, 0], 3, 0))
    with pytest.raises(ValueError):
        solve_rbkp(RbkpProblem([1], [1], [0], 3, -1))
    with pytest.raises(ValueError):
        solve_rbkp(RbkpProblem([1], [1], [0], 3, 0, forced_in=5))
