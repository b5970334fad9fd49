import numpy as np
import pytest
from scipy.optimize import linprog

from rsscflp.lp import LinearProgram


def test_single_bound_row():
    lp = LinearProgram([">="], [3.0])
    lp.add_columns([1.0], [[1.0]])
    sol = lp.solve()
    assert sol.status == "optimal"
    assert sol.primal[0] == pytest.approx(3.0) and sol.dual[0] == pytest.approx(1.0)


def test_cheapest_column():
    lp = LinearProgram([">="], [4.0])
    lp.add_columns([2.0, 3.0], [[1.0, 1.0]])
    sol = lp.solve()
    assert sol.objective == pytest.approx(8.0)
    assert np.allclose(sol.primal, [4, 0]) and sol.dual[0] == pytest.approx(2.0)


def test_infeasible_and_unbounded():
    lp = LinearProgram([">="], [2.0])
    lp.add_columns([1.0], [[1.0]], upper=[1.0])
    assert lp.solve().status == "infeasible"
    lp = LinearProgram([">="], [1.0])
    lp.add_columns([-1.0], [[1.0]])
    assert lp.solve().status == "unbounded"


def test_warm_start_modifications():
    lp = LinearProgram([">=", ">="], [1.0, 1.0])
    lp.add_columns([10.0], [[1.0], [1.0]])
    assert lp.solve().objective == pytest.approx(10.0)
    # cheaper pair of columns
    lp.add_columns([3.0, 4.0], [[1.0, 0.0], [0.0, 1.0]])
    sol = lp.solve()
    assert sol.objective == pytest.approx(7.0)
    # a column with nonnegative reduced cost changes nothing
    lp.add_columns([20.0], [[1.0], [1.0]])
    assert lp.solve().objective == pytest.approx(7.0)
    # fixing a basic column to zero pushes the load back to the first one
    lp.set_column_upper(1, 0.0)
    assert lp.solve().objective == pytest.approx(10.0)
    lp.set_column_upper(1, np.inf)
    assert lp.solve().objective == pytest.approx(7.0)


def test_row_sense_switch():
    # min x0 + x1, x0 + x1 >= 1, -x0 >= -1 ; make the second row an equality
    lp = LinearProgram([">=", ">="], [1.0, -1.0])
    lp.add_columns([1.0, 1.0], [[1.0, 1.0], [-1.0, 0.0]])
    base = lp.solve().objective
    lp.set_row_sense(1, "=")
    sol = lp.solve()
    assert sol.objective == pytest.approx(base) and sol.primal[0] == pytest.approx(1.0)
    assert lp.row_sense(1) == "="
    lp.set_row_sense(1, ">=")
    assert lp.solve().objective == pytest.approx(base)


def random_lp(rng):
    nr, nc = rng.integers(1, 9), rng.integers(1, 14)
    a = rng.integers(-3, 6, (nr, nc)).astype(float)
    a[rng.random((nr, nc)) < 0.3] = 0.0
    b = rng.integers(-4, 10, nr).astype(float)
    c = rng.integers(-2, 10, nc).astype(float)
    senses = [">=" if rng.random() < 0.7 else "=" for _ in range(nr)]
    upper = np.where(rng.random(nc) < 0.4, rng.integers(1, 6, nc), np.inf)
    return a, b, c, senses, upper


def scipy_solve(a, b, c, senses, upper):
    ge = [r for r, s in enumerate(senses) if s == ">="]
    eq = [r for r, s in enumerate(senses) if s == "="]
    res = linprog(
        c,
        A_ub=-a[ge] if ge else None,
        b_ub=-b[ge] if ge else None,
        A_eq=a[eq] if eq else None,
        b_eq=b[eq] if eq else None,
        bounds=[(0, None if np.isinf(u) else u) for u in upper],
        method="highs",
    )
    return {0: "optimal", 2: "infeasible", 3: "unbounded"}[res.status], res.fun


@pytest.mark.parametrize("seed", range(200))
def test_random_lps_match_highs(seed):
    rng = np.random.default_rng(seed)
    a, b, c, senses, upper = random_lp(rng)
    lp = LinearProgram(senses, b)
    lp.add_columns(c, a, upper=upper)
    sol = lp.solve()
    status, obj = scipy_solve(a, b, c, senses, upper)
    if status == "unbounded" and sol.status == "infeasible":
        pytest.skip("HiGHS may report unbounded for an infeasible LP with a free ray")
    assert sol.status == status
    if status != "optimal":
        return
    assert sol.objective == pytest.approx(obj, abs=1e-6 * (1 + abs(obj)))
    x = sol.primal
    assert np.all(x >= -1e-7) and np.all(x <= upper + 1e-7)
    act = a @ x
    for r, s in enumerate(senses):
        if s == ">=":
            assert act[r] >= b[r] - 1e-6
            assert sol.dual[r] >= -1e-7
        else:
            assert act[r] == pytest.approx(b[r], abs=1e-6)
    assert lp.duality_gap() <= 1e-6 * (1 + abs(obj))


def test_deterministic():
    rng = np.random.default_rng(5)
    a, b, c, senses, upper = random_lp(rng)
    out = []
    for _ in range(2):
        lp = LinearProgram(senses, b)
        lp.add_columns(c, a, upper=upper)
        sol = lp.solve()
        out.append((sol.status, sol.iterations, sol.primal.tobytes(), sol.dual.tobytes()))
    assert out[0] == out[1]


def test_degenerate_assignment_lp():
    # highly degenerate transportation-type LP
    n = 12
    lp = LinearProgram([">="] * (2 * n), [1.0] * n + [-1.0] * n)
    cols, costs = [], []
    for i in range(n):
        for j in range(n):
            v = np.zeros(2 * n)
            v[j] = 1.0
            v[n + i] = -1.0
            cols.append(v)
            costs.append(float((i * 7 + j * 3) % 5))
    lp.add_columns(costs, np.array(cols).T)
    sol = lp.solve()
    from scipy.optimize import linear_sum_assignment

    r, k = linear_sum_assignment(np.array(costs).reshape(n, n))
    assert sol.objective == pytest.approx(np.array(costs).reshape(n, n)[r, k].sum())


def test_shape_checks():
    lp = LinearProgram([">="], [1.0])
    with pytest.raises(ValueError):
        lp.add_columns([1.0], [[1.0], [2.0]])
    with pytest.raises(ValueError):
        LinearProgram(["<="], [1.0])
    with pytest.raises(ValueError):
        lp.add_columns([1.0], [[1.0]], lower=[2.0], upper=[1.0])
