"""Restricted master problem over allocation columns.

Rows ``0..n-1`` are the covering rows ``sum z >= 1`` (one per customer) and
rows ``n..n+m-1`` the convexity rows ``-sum_{R} z_R^i >= -1`` whose slack is
the "facility closed" variable.  A convexity row becomes an equality when
the facility is fixed open.  Column 0 is the dummy that covers every
customer at twice the total cost of the instance and keeps the LP feasible.

The column pool is shared by all tree nodes; columns that violate the fixes
of the current node get an upper bound of zero.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram
from .model import Instance, column_cost, is_feasible_column

DUMMY = -1
INTEGRALITY_TOL = 1e-6


class ContradictoryFix(ValueError):
    """A node would fix a facility both open and closed."""


@dataclass(frozen=True)
class FixSet:
    """Branching and reduced-cost fixes that hold in a subtree."""

    closed: frozenset = frozenset()
    opened: frozenset = frozenset()
    forbidden: frozenset = frozenset()  # pairs (i, j) with x_ij = 0

    def add(self, kind: str, i: int, j: int | None = None) -> "FixSet":
        if kind == "y0":
            if i in self.opened:
                raise ContradictoryFix(f"facility {i} already fixed open")
            return FixSet(self.closed | {i}, self.opened, self.forbidden)
        if kind == "y1":
            if i in self.closed:
                raise ContradictoryFix(f"facility {i} already fixed closed")
            return FixSet(self.closed, self.opened | {i}, self.forbidden)
        if kind == "x0":
            return FixSet(self.closed, self.opened, self.forbidden | {(i, j)})
        raise ValueError(f"unknown fix kind {kind!r}")

    def extend(self, fixes) -> "FixSet":
        out = self
        for fix in fixes:
            out = out.add(*fix)
        return out

    def forbidden_matrix(self, m: int, n: int) -> np.ndarray:
        mask = np.zeros((m, n), dtype=bool)
        for i, j in self.forbidden:
            mask[i, j] = True
        return mask

    def allows(self, facility_of) -> bool:
        """True when an assignment (customer -> facility) satisfies every fix."""
        used = set(facility_of)
        if self.closed & used:
            return False
        if not self.opened <= used:
            return False
        return not any((i, j) in self.forbidden for j, i in enumerate(facility_of))


@dataclass
class Column:
    facility: int
    customers: tuple
    cost: int
    lp_index: int


@dataclass
class DualPrices:
    lam: np.ndarray  # covering rows, >= 0
    mu: np.ndarray  # convexity rows, >= 0 unless the facility is fixed open


@dataclass
class RmpSolution:
    objective: float
    duals: DualPrices
    z: np.ndarray


@dataclass
class MasterState:
    inst: Instance
    lp: LinearProgram
    columns: list = field(default_factory=list)
    keys: dict = field(default_factory=dict)
    fixes: FixSet = field(default_factory=FixSet)

    def __post_init__(self):
        self._fac = np.zeros(16, dtype=np.int64)
        self._members = np.zeros((16, self.inst.n), dtype=bool)

    @property
    def dummy_cost(self) -> int:
        return self.columns[0].cost

    # -- pool management -------------------------------------------------------

    def _store(self, col: Column, members: np.ndarray) -> None:
        k = len(self.columns)
        if k >= len(self._fac):
            cap = 2 * len(self._fac)
            fac = np.zeros(cap, dtype=np.int64)
            fac[:k] = self._fac[:k]
            mem = np.zeros((cap, self.inst.n), dtype=bool)
            mem[:k] = self._members[:k]
            self._fac, self._members = fac, mem
        self._fac[k] = col.facility
        self._members[k] = members
        self.columns.append(col)

    def _column_vector(self, i: int, customers) -> np.ndarray:
        inst = self.inst
        vec = np.zeros(inst.n + inst.m)
        vec[list(customers)] = 1.0
        if i != DUMMY:
            vec[inst.n + i] = -1.0
        return vec

    def _upper_for(self, i: int, customers) -> float:
        if i == DUMMY:
            return np.inf
        if i in self.fixes.closed:
            return 0.0
        if any((i, j) in self.fixes.forbidden for j in customers):
            return 0.0
        return np.inf

    def add_column(self, i: int, customers) -> int | None:
        """Add column (i, R); returns its index or None if already pooled."""
        customers = tuple(sorted(customers))
        key = (i, customers)
        if key in self.keys:
            return None
        if i != DUMMY and not is_feasible_column(self.inst, i, customers):
            raise ValueError(f"column {key} violates the robust capacity of facility {i}")
        cost = column_cost(self.inst, i, customers) if i != DUMMY else 2 * self.inst.total_cost()
        if i == DUMMY:
            cost = max(cost, 1)
        idx = self.lp.add_columns([cost], self._column_vector(i, customers), upper=[self._upper_for(i, customers)])[0]
        members = np.zeros(self.inst.n, dtype=bool)
        members[list(customers)] = True
        self._store(Column(i, customers, cost, idx), members)
        self.keys[key] = len(self.columns) - 1
        return len(self.columns) - 1

    def add_columns(self, cols) -> int:
        return sum(self.add_column(i, r) is not None for i, r in cols)

    # -- fixes ---------------------------------------------------------------------

    def set_fixes(self, fixes: FixSet) -> None:
        """Make the LP reflect exactly the given fixes."""
        inst = self.inst
        for i in fixes.opened:
            # an open facility may end up serving nobody
            self.add_column(i, ())
        self.fixes = fixes
        k = len(self.columns)
        fac = self._fac[:k]
        blocked = np.zeros(k, dtype=bool)
        real = fac != DUMMY
        if fixes.closed:
            blocked[real] |= np.isin(fac[real], list(fixes.closed))
        if fixes.forbidden:
            mask = fixes.forbidden_matrix(inst.m, inst.n)
            hits = self._members[:k] & mask[np.where(real, fac, 0)]
            blocked |= real & hits.any(axis=1)
        self.lp.set_column_uppers(np.where(blocked, 0.0, np.inf))
        for i in range(inst.m):
            self.lp.set_row_sense(inst.n + i, "=" if i in fixes.opened else ">=")

    def apply_fix(self, kind: str, i: int, j: int | None = None) -> None:
        self.set_fixes(self.fixes.add(kind, i, j))

    # -- solving -------------------------------------------------------------------

    def solve(self) -> RmpSolution:
        sol = self.lp.solve()
        if sol.status != "optimal":
            raise RuntimeError(f"restricted master LP is {sol.status}")
        n = self.inst.n
        duals = DualPrices(sol.dual[:n].copy(), sol.dual[n:].copy())
        return RmpSolution(sol.objective, duals, sol.primal.copy())

    def project(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map column values to facility-customer values x (m x n) and y (m)."""
        inst = self.inst
        k = len(self.columns)
        fac = self._fac[:k]
        real = fac != DUMMY
        ind = np.zeros((inst.m, k))
        ind[fac[real], np.flatnonzero(real)] = z[:k][real]
        y = ind.sum(axis=1)
        x = ind @ self._members[:k].astype(float)
        return x, y

    def dummy_value(self, z: np.ndarray) -> float:
        return float(z[0])

    def detect_infeasible(self, z: np.ndarray) -> bool:
        return self.dummy_value(z) > INTEGRALITY_TOL

    def assignment_from(self, z: np.ndarray) -> list[int] | None:
        """Customer -> facility map read off an integral z; None if incomplete."""
        facility_of = [-1] * self.inst.n
        for col, val in zip(self.columns, z):
            if col.facility == DUMMY or val < 0.5:
                continue
            for j in col.customers:
                if facility_of[j] < 0:
                    facility_of[j] = col.facility
        return None if min(facility_of) < 0 else facility_of

    def pool_csv(self) -> str:
        out = io.StringIO()
        out.write("facility,customers,cost\n")
        for col in self.columns:
            out.write(f"{col.facility},{' '.join(map(str, col.customers))},{col.cost}\n")
        return out.getvalue()


def init_master(inst: Instance, fixes: FixSet | None = None, initial_pool: str = "singletons") -> MasterState:
    """Master with the dummy column and, by default, every feasible singleton."""
    if initial_pool not in ("singletons", "dummy"):
        raise ValueError(f"unknown initial pool {initial_pool!r}")
    lp = LinearProgram([">="] * (inst.n + inst.m), [1.0] * inst.n + [-1.0] * inst.m)
    state = MasterState(inst, lp)
    fixes = fixes or FixSet()
    state.fixes = fixes
    state.add_column(DUMMY, range(inst.n))
    if initial_pool == "singletons":
        for i in range(inst.m):
            if i in fixes.closed:
                continue
            for j in range(inst.n):
                if (i, j) not in fixes.forbidden and is_feasible_column(inst, i, (j,)):
                    state.add_column(i, (j,))
    state.set_fixes(fixes)
    return state


def is_integral(x: np.ndarray, y: np.ndarray, tol: float = INTEGRALITY_TOL) -> bool:
    return bool(np.all(np.abs(x - np.round(x)) <= tol) and np.all(np.abs(y - np.round(y)) <= tol))
