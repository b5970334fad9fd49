import math

import numpy as np
import pytest

from rsscflp.master import init_master
from rsscflp.model import Assignment, Instance, compact_lp_bound, evaluate
from rsscflp.oracle import brute_force_optimal, full_master_lp

from toys import raw_instance


def naive_optimum(inst):
    best = math.inf
    for code in range(inst.m**inst.n):
        fo = [(code // inst.m**j) % inst.m for j in range(inst.n)]
        ev = evaluate(inst, Assignment.from_facility_of(inst, fo))
        if ev.feasible:
            best = min(best, ev.objective)
    return best


def test_single_facility():
    inst = Instance.build([9], [100], [2], [3, 4, 5], [1, 1, 1], [[1, 2, 3]])
    res = brute_force_optimal(inst)
    assert res.objective == 9 + 6 and res.facility_of == [0, 0, 0]


def test_zero_capacity():
    inst = Instance.build([1, 1], [0, 0], [0, 0], [1], [0], [[0], [0]])
    assert brute_force_optimal(inst).objective == math.inf
    assert full_master_lp(inst) == math.inf


@pytest.mark.parametrize("seed", range(20))
def test_against_naive_enumeration(seed):
    inst = raw_instance(seed, 3, 5)
    res = brute_force_optimal(inst)
    assert res.objective == naive_optimum(inst)
    if res.facility_of is not None:
        assert evaluate(inst, Assignment.from_facility_of(inst, res.facility_of)).objective == res.objective


@pytest.mark.parametrize("seed", range(10))
def test_permutation_invariance(seed):
    inst = raw_instance(seed, 3, 6)
    perm = np.random.default_rng(seed).permutation(6)
    shuffled = inst.replace(
        demand=tuple(inst.demand[j] for j in perm),
        deviation=tuple(inst.deviation[j] for j in perm),
        assign_cost=tuple(tuple(row[j] for j in perm) for row in inst.assign_cost),
    )
    assert brute_force_optimal(shuffled).objective == brute_force_optimal(inst).objective


@pytest.mark.parametrize("seed", range(10))
def test_full_master_between_bounds(seed):
    inst = raw_instance(seed, 3, 6)
    fm = full_master_lp(inst)
    opt = brute_force_optimal(inst).objective
    if math.isinf(opt):
        return
    assert compact_lp_bound(inst).objective <= fm + 1e-6
    assert fm <= opt + 1e-6


def test_guards():
    with pytest.raises(ValueError):
        brute_force_optimal(raw_instance(0, 10, 10))
    with pytest.raises(ValueError):
        full_master_lp(raw_instance(0, 2, 13))


def test_nominal_master_equals_dw_bound():
    # with no deviations the full master is the classic set-partitioning bound
    inst = raw_instance(3, 2, 5).replace(gamma=(0, 0), deviation=(0,) * 5)
    fm = full_master_lp(inst)
    state = init_master(inst)
    from rsscflp.oracle import feasible_subsets

    for i in range(inst.m):
        state.add_columns((i, s) for s in feasible_subsets(inst, i))
    assert state.solve().objective == pytest.approx(fm)
