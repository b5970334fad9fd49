"""Monte-Carlo feasibility of a fixed assignment under random demand.

Scenario demand is ``d_j (1 + delta Z_j)`` with ``Z_j`` standard normal
conditioned on ``Z_j >= -2`` (rejection resampling), i.e. a normal with
standard deviation ``delta d_j`` whose tail below ``d_j (1 - 2 delta)`` is
cut off.  A scenario fails when some open facility receives more than its
capacity.  Deviations of the instance play no role here.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .bnp import SolverConfig, solve
from .instgen import with_deviation
from .model import Assignment, Instance

TRUNCATION = -2.0


@dataclass(frozen=True)
class SimSpec:
    delta: float = 0.1
    scenarios: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.scenarios < 1:
            raise ValueError("need at least one scenario")


@dataclass
class SimResult:
    infeasibility_pct: float
    infeasible: int
    scenarios: int
    violations: list  # per facility: scenarios in which it overflows


def truncated_normal(rng: np.random.Generator, size) -> np.ndarray:
    z = rng.standard_normal(size)
    bad = z < TRUNCATION
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = z < TRUNCATION
    return z


def sample_scenario(inst: Instance, delta: float, rng: np.random.Generator) -> np.ndarray:
    d = np.asarray(inst.demand, dtype=float)
    if delta == 0:
        return d.copy()
    return d * (1.0 + delta * truncated_normal(rng, d.shape))


def sample_scenarios(inst: Instance, spec: SimSpec) -> np.ndarray:
    """All scenarios as a (scenarios x n) array; one fresh stream per call."""
    d = np.asarray(inst.demand, dtype=float)
    if spec.delta == 0:
        return np.tile(d, (spec.scenarios, 1))
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    return d * (1.0 + spec.delta * truncated_normal(rng, (spec.scenarios, inst.n)))


def evaluate_robustness(inst: Instance, assignment: Assignment, spec: SimSpec, scenarios=None) -> SimResult:
    fo = np.asarray(assignment.facility_of)
    if fo.shape != (inst.n,) or fo.min() < 0 or fo.max() >= inst.m:
        raise ValueError("assignment does not map every customer to a facility")
    if scenarios is None:
        scenarios = sample_scenarios(inst, spec)
    member = np.zeros((inst.n, inst.m))
    member[np.arange(inst.n), fo] = 1.0
    loads = scenarios @ member
    over = loads > np.asarray(inst.capacity, dtype=float)
    bad = int(over.any(axis=1).sum())
    k = len(scenarios)
    return SimResult(100.0 * bad / k, bad, k, over.sum(axis=0).astype(int).tolist())


def open_capacity(inst: Instance, assignment: Assignment) -> int:
    return sum(s for s, o in zip(inst.capacity, assignment.open) if o)


def zero_intercept_fit(x, y) -> tuple[float, float]:
    """Least squares slope of y = a x and its uncentered R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sxx = float(x @ x)
    if sxx == 0:
        return math.nan, math.nan
    a = float(x @ y) / sxx
    syy = float(y @ y)
    if syy == 0:
        return a, 1.0
    resid = y - a * x
    return a, 1.0 - float(resid @ resid) / syy


@dataclass
class TradeoffRow:
    sigma: int  # per mille
    gamma: int
    delta: float
    status: str
    objective: int | None
    infeasibility_pct: float | None
    penalty_cost_pct: float | None
    additional_capacity_pct: float | None


def tradeoff_grid(inst: Instance, sigma_set, gamma_set, delta_set, spec: SimSpec, config: SolverConfig | None = None,
                  common_numbers: bool = True):
    """Solve every (sigma, gamma) variant and simulate it at every delta.

    Penalty and capacity percentages compare against the nominal solution
    (sigma = 0, gamma = 0), which is solved first.  With ``common_numbers``
    each delta uses the same scenario stream for every solution.
    Returns ``(rows, fit)`` where ``fit`` is the zero-intercept regression of
    additional capacity on penalty cost over the non-nominal cells.
    """
    config = config or SolverConfig()
    cache = {}

    def solved(sigma, gamma):
        if (sigma, gamma) not in cache:
            cache[sigma, gamma] = solve(with_deviation(inst, sigma, gamma), config)
        return cache[sigma, gamma]

    base = solved(0, 0)
    if base.assignment is None:
        raise ValueError(f"nominal instance has no solution ({base.status})")
    base_obj = base.objective
    base_cap = open_capacity(inst, base.assignment)
    streams = {}
    for t, delta in enumerate(delta_set):
        seed = spec.seed if common_numbers else spec.seed + t
        streams[delta] = sample_scenarios(inst, SimSpec(delta, spec.scenarios, seed))

    rows = []
    fit_x, fit_y = [], []
    cells = [(0, 0)] + [(s, g) for s in sigma_set for g in gamma_set if (s, g) != (0, 0)]
    for k, (sigma, gamma) in enumerate(cells):
        rep = solved(sigma, gamma)
        penalty = capacity = None
        if rep.assignment is not None:
            penalty = 100.0 * (rep.objective - base_obj) / base_obj if base_obj else 0.0
            capacity = 100.0 * (open_capacity(inst, rep.assignment) - base_cap) / base_cap
            if sigma > 0 and gamma > 0:
                fit_x.append(penalty)
                fit_y.append(capacity)
        for t, delta in enumerate(delta_set):
            infeas = None
            if rep.assignment is not None:
                scen = streams[delta]
                if not common_numbers:
                    scen = sample_scenarios(inst, SimSpec(delta, spec.scenarios, spec.seed + 1000 * (k + 1) + t))
                infeas = evaluate_robustness(inst, rep.assignment, SimSpec(delta, spec.scenarios, spec.seed), scen).infeasibility_pct
            rows.append(TradeoffRow(sigma, gamma, delta, rep.status, rep.objective, infeas, penalty, capacity))
    fit = zero_intercept_fit(fit_x, fit_y) if fit_x else (math.nan, math.nan)
    return rows, fit


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def rows_to_csv(rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["sigma", "gamma", "delta", "status", "objective", "infeasibility_pct", "penalty_cost_pct",
                "additional_capacity_pct"])
    for r in rows:
        w.writerow([f"{r.sigma / 1000:.3f}", r.gamma, f"{r.delta:.4f}", r.status, _fmt(r.objective),
                    _fmt(r.infeasibility_pct), _fmt(r.penalty_cost_pct), _fmt(r.additional_capacity_pct)])
    return out.getvalue()


def parse_range(text: str) -> list[float]:
    """'0:0.4:0.05' -> [0, 0.05, ..., 0.4]; '0.1,0.2' -> [0.1, 0.2]."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"bad range {text!r}")
        lo, hi, step = parts
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 10) for k in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]
