"""Instance data, robust capacity semantics and solution evaluation.

All problem data are nonnegative integers.  A facility ``i`` can serve a
customer set ``R`` when its nominal demand plus the ``gamma[i]`` largest
deviations inside ``R`` fits into ``capacity[i]``.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

FORMAT = "rsscflp-1"


class FormatError(ValueError):
    """Raised for malformed instance or solution files."""


def _ints(values) -> tuple[int, ...]:
    out = []
    for v in values:
        if isinstance(v, bool) or int(v) != v:
            raise ValueError(f"parameters must be nonnegative integers, got {v!r}")
        out.append(int(v))
    return tuple(out)


@dataclass(frozen=True)
class Instance:
    fixed_cost: tuple[int, ...]
    capacity: tuple[int, ...]
    gamma: tuple[int, ...]
    demand: tuple[int, ...]
    deviation: tuple[int, ...]
    assign_cost: tuple[tuple[int, ...], ...]
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        m, n = len(self.fixed_cost), len(self.demand)
        if m < 1 or n < 1:
            raise ValueError("need at least one facility and one customer")
        if len(self.capacity) != m or len(self.gamma) != m:
            raise ValueError("facility arrays differ in length")
        if len(self.deviation) != n:
            raise ValueError("customer arrays differ in length")
        if len(self.assign_cost) != m or any(len(row) != n for row in self.assign_cost):
            raise ValueError("assign_cost must be m x n")
        values = [*self.fixed_cost, *self.capacity, *self.gamma, *self.demand, *self.deviation]
        values += [c for row in self.assign_cost for c in row]
        for v in values:
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise ValueError(f"parameters must be nonnegative integers, got {v!r}")
        # gamma above n is the same uncertainty set as gamma == n
        object.__setattr__(self, "gamma", tuple(min(int(g), n) for g in self.gamma))

    @classmethod
    def build(cls, fixed_cost, capacity, gamma, demand, deviation, assign_cost, meta=None):
        """Convenience constructor accepting any integer sequences (numpy included)."""
        m = len(fixed_cost)
        if np.isscalar(gamma):
            gamma = [gamma] * m
        return cls(
            fixed_cost=_ints(fixed_cost),
            capacity=_ints(capacity),
            gamma=_ints(gamma),
            demand=_ints(demand),
            deviation=_ints(deviation),
            assign_cost=tuple(_ints(row) for row in assign_cost),
            meta=dict(meta or {}),
        )

    @property
    def m(self) -> int:
        return len(self.fixed_cost)

    @property
    def n(self) -> int:
        return len(self.demand)

    def replace(self, **changes) -> "Instance":
        data = dict(
            fixed_cost=self.fixed_cost,
            capacity=self.capacity,
            gamma=self.gamma,
            demand=self.demand,
            deviation=self.deviation,
            assign_cost=self.assign_cost,
            meta=self.meta,
        )
        data.update(changes)
        return Instance.build(**data)

    def total_cost(self) -> int:
        return sum(self.fixed_cost) + sum(sum(row) for row in self.assign_cost)

    def supply_demand_ratio(self) -> float:
        return sum(self.capacity) / sum(self.demand) if sum(self.demand) else float("inf")

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "format": FORMAT,
            "m": self.m,
            "n": self.n,
            "facilities": [
                {"fixed_cost": f, "capacity": s, "gamma": g}
                for f, s, g in zip(self.fixed_cost, self.capacity, self.gamma)
            ],
            "customers": [{"demand": d, "deviation": b} for d, b in zip(self.demand, self.deviation)],
            "assign_cost": [list(row) for row in self.assign_cost],
        }
        if self.meta:
            out["generator"] = self.meta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        try:
            if data.get("format", FORMAT) != FORMAT:
                raise FormatError(f"unsupported format {data.get('format')!r}")
            fac = data["facilities"]
            cus = data["customers"]
            inst = cls.build(
                fixed_cost=[f["fixed_cost"] for f in fac],
                capacity=[f["capacity"] for f in fac],
                gamma=[f.get("gamma", 0) for f in fac],
                demand=[c["demand"] for c in cus],
                deviation=[c.get("deviation", 0) for c in cus],
                assign_cost=data["assign_cost"],
                meta=data.get("generator"),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed instance: {exc}") from exc
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
        if data.get("m", inst.m) != inst.m or data.get("n", inst.n) != inst.n:
            raise FormatError("declared m/n do not match the data")
        return inst


@dataclass
class Assignment:
    facility_of: list[int]
    open: list[bool]

    @classmethod
    def from_facility_of(cls, inst: Instance, facility_of: Sequence[int]) -> "Assignment":
        is_open = [False] * inst.m
        for i in facility_of:
            is_open[i] = True
        return cls(list(facility_of), is_open)

    def customers_of(self, i: int) -> list[int]:
        return [j for j, k in enumerate(self.facility_of) if k == i]


@dataclass
class Evaluation:
    objective: int | None
    violations: list[int]

    @property
    def feasible(self) -> bool:
        return not self.violations


class StructuralError(ValueError):
    """Assignment references a closed or unknown facility."""


def worst_case_load(inst: Instance, i: int, customers: Iterable[int]) -> int:
    """Nominal load of ``customers`` plus their ``gamma[i]`` largest deviations."""
    customers = list(customers)
    nominal = sum(inst.demand[j] for j in customers)
    g = inst.gamma[i]
    if g == 0 or not customers:
        return nominal
    devs = [inst.deviation[j] for j in customers]
    if g >= len(devs):
        return nominal + sum(devs)
    return nominal + sum(heapq.nlargest(g, devs))


def is_feasible_column(inst: Instance, i: int, customers: Iterable[int]) -> bool:
    return worst_case_load(inst, i, customers) <= inst.capacity[i]


def column_cost(inst: Instance, i: int, customers: Iterable[int]) -> int:
    return inst.fixed_cost[i] + sum(inst.assign_cost[i][j] for j in customers)


def evaluate(inst: Instance, assignment: Assignment) -> Evaluation:
    if len(assignment.facility_of) != inst.n or len(assignment.open) != inst.m:
        raise StructuralError("assignment size does not match the instance")
    groups: list[list[int]] = [[] for _ in range(inst.m)]
    for j, i in enumerate(assignment.facility_of):
        if not 0 <= i < inst.m:
            raise StructuralError(f"customer {j} assigned to unknown facility {i}")
        if not assignment.open[i]:
            raise StructuralError(f"customer {j} assigned to closed facility {i}")
        groups[i].append(j)
    violations = [i for i in range(inst.m) if assignment.open[i] and not is_feasible_column(inst, i, groups[i])]
    if violations:
        return Evaluation(None, violations)
    objective = sum(inst.fixed_cost[i] for i in range(inst.m) if assignment.open[i])
    objective += sum(inst.assign_cost[i][j] for j, i in enumerate(assignment.facility_of))
    return Evaluation(objective, [])


# -- compact LP bound -------------------------------------------------------


@dataclass
class CompactLpResult:
    objective: float
    status: str


def compact_lp_bound(inst: Instance) -> CompactLpResult:
    """LP relaxation of the dualized robust compact model.

    Columns are x (m*n), y (m), p (m*n), q (m).  The robust capacity row is
    ``s_i y_i - sum_j d_j x_ij - sum_j p_ij - gamma_i q_i >= 0`` together with
    ``q_i + p_ij - b_j x_ij >= 0``; assignment rows are equalities and the
    linking rows ``y_i - x_ij >= 0`` are kept.
    """
    from .lp import LinearProgram

    m, n = inst.m, inst.n
    x = lambda i, j: i * n + j  # noqa: E731
    y = lambda i: m * n + i  # noqa: E731
    p = lambda i, j: m * n + m + i * n + j  # noqa: E731
    q = lambda i: 2 * m * n + m + i  # noqa: E731
    ncols = 2 * m * n + 2 * m

    rows: list[tuple[dict[int, float], str, float]] = []
    for j in range(n):
        rows.append(({x(i, j): 1.0 for i in range(m)}, "=", 1.0))
    for i in range(m):
        coef = {y(i): float(inst.capacity[i]), q(i): -float(inst.gamma[i])}
        for j in range(n):
            coef[x(i, j)] = -float(inst.demand[j])
            coef[p(i, j)] = -1.0
        rows.append((coef, ">=", 0.0))
    for i in range(m):
        for j in range(n):
            rows.append(({y(i): 1.0, x(i, j): -1.0}, ">=", 0.0))
    for i in range(m):
        for j in range(n):
            rows.append(({q(i): 1.0, p(i, j): 1.0, x(i, j): -float(inst.deviation[j])}, ">=", 0.0))

    nrows = len(rows)
    a = np.zeros((nrows, ncols))
    for r, (coef, _, _) in enumerate(rows):
        for c, v in coef.items():
            a[r, c] = v
    cost = np.zeros(ncols)
    upper = np.full(ncols, np.inf)
    for i in range(m):
        cost[y(i)] = inst.fixed_cost[i]
        upper[y(i)] = 1.0
        for j in range(n):
            cost[x(i, j)] = inst.assign_cost[i][j]
            upper[x(i, j)] = 1.0

    lp = LinearProgram([s for _, s, _ in rows], [r for _, _, r in rows])
    lp.add_columns(cost, a, upper=upper)
    sol = lp.solve()
    if sol.status != "optimal":
        return CompactLpResult(float("inf"), sol.status)
    return CompactLpResult(sol.objective, "optimal")


# -- solution files ------------------------------------------------------------


def solution_to_dict(objective: int | None, assignment: Assignment | None, **extra) -> dict:
    out: dict = {"format": FORMAT, "objective": objective}
    if assignment is not None:
        out["open"] = [i for i, o in enumerate(assignment.open) if o]
        out["facility_of"] = list(assignment.facility_of)
    else:
        out["open"] = []
        out["facility_of"] = []
    out.update(extra)
    return out


def solution_from_dict(inst: Instance, data: dict) -> tuple[int | None, Assignment]:
    try:
        if data.get("format", FORMAT) != FORMAT:
            raise FormatError(f"unsupported format {data.get('format')!r}")
        facility_of = [int(i) for i in data["facility_of"]]
        opened = set(int(i) for i in data["open"])
        objective = data.get("objective")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed solution: {exc}") from exc
    if len(facility_of) != inst.n:
        raise FormatError("facility_of has the wrong length")
    if any(not 0 <= i < inst.m for i in opened):
        raise FormatError("open lists an unknown facility")
    return objective, Assignment(facility_of, [i in opened for i in range(inst.m)])


def dumps(data: dict) -> str:
    return json.dumps(data, indent=1, sort_keys=False) + "\n"


def load_instance(path) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: {exc}") from exc
    return Instance.from_dict(data)


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(inst.to_dict()))
