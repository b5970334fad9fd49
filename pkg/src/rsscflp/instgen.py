"""Seeded random instances in the style of the T3 and T4 test sets.

Draws come from numpy's PCG64 generator in a fixed order: demands,
capacities, locations (customers then facilities), setup costs, deviation
rates.  Deviation rates are integers ``k`` in ``[lo, hi]`` per mille and
``b_j = d_j * k // 1000``, so no floating point enters the data.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .model import Instance


@dataclass(frozen=True)
class GenSpec:
    scheme: str = "t3"
    m: int = 10
    n: int = 20
    target_ratio: float | None = 4.0  # total capacity / total demand; None keeps raw draws (t4 only)
    seed: int = 0
    gamma: int = 5
    sigma_range: tuple = (100, 500)  # per mille, inclusive

    def __post_init__(self):
        if self.scheme not in ("t3", "t4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        if self.target_ratio is None and self.scheme == "t3":
            raise ValueError("t3 needs a target ratio")
        if self.target_ratio is not None and self.target_ratio <= 0:
            raise ValueError("target ratio must be positive")
        lo, hi = self.sigma_range
        if not 0 <= lo <= hi <= 1000:
            raise ValueError("sigma range must lie in [0, 1000] per mille")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def scale_capacities(s, d, target_ratio: float) -> list[int]:
    """Multiply every capacity by one factor so that sum(s)/sum(d) hits the target."""
    total_d = int(sum(d))
    total_s = int(sum(s))
    if total_d <= 0:
        raise ValueError("total demand must be positive")
    if total_s <= 0:
        raise ValueError("total capacity must be positive")
    factor = target_ratio * total_d / total_s
    return [max(1, math.floor(v * factor + 0.5)) for v in s]


def _distances(a: np.ndarray, b: np.ndarray) -> list[list[float]]:
    # plain scalar sqrt keeps the floor() below platform independent
    return [[math.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2) for q in b] for p in a]


def generate(spec: GenSpec) -> Instance:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    m, n = spec.m, spec.n
    if spec.scheme == "t3":
        d = rng.integers(5, 35, size=n, endpoint=True).tolist()
        s = rng.integers(10, 160, size=m, endpoint=True).tolist()
        s = scale_capacities(s, d, spec.target_ratio)
        cust = rng.random((n, 2))
        fac = rng.random((m, 2))
        dist = _distances(fac, cust)
        c = [[math.floor(10 * d[j] * dist[i][j]) for j in range(n)] for i in range(m)]
        base = rng.integers(0, 90, size=m, endpoint=True).tolist()
        mult = rng.integers(100, 110, size=m, endpoint=True).tolist()
        f = [math.floor(base[i] + mult[i] * math.sqrt(s[i])) for i in range(m)]
    else:
        d = rng.integers(10, 50, size=n, endpoint=True).tolist()
        s = rng.integers(100, 500, size=m, endpoint=True).tolist()
        if spec.target_ratio is not None:
            s = scale_capacities(s, d, spec.target_ratio)
        cust = rng.random((n, 2)) * 190
        fac = rng.random((m, 2)) * 190
        dist = _distances(fac, cust)
        c = [[math.floor(dist[i][j]) for j in range(n)] for i in range(m)]
        f = rng.integers(300, 700, size=m, endpoint=True).tolist()
    lo, hi = spec.sigma_range
    sigma = rng.integers(lo, hi, size=n, endpoint=True).tolist()
    b = [d[j] * sigma[j] // 1000 for j in range(n)]
    meta = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(spec).items()}
    return Instance.build(f, s, spec.gamma, d, b, c, meta=meta)


def with_deviation(inst: Instance, sigma_per_mille: int, gamma: int) -> Instance:
    """Same instance with b_j = d_j * sigma // 1000 and a common budget."""
    b = [d * sigma_per_mille // 1000 for d in inst.demand]
    return inst.replace(deviation=tuple(b), gamma=(gamma,) * inst.m)
