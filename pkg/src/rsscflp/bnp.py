"""Depth-first branch-and-price.

Each node runs column generation on the shared master under its fixes.  A
Lagrangian bound computed from the pricing optima lets a node be dropped
before its LP converges, and converged nodes use the same quantities to fix
assignment and opening variables by reduced cost.  Branching is on the
opening variables first and then on one customer's assignment row split
into two groups of facilities.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .master import INTEGRALITY_TOL, ContradictoryFix, FixSet, MasterState, init_master, is_integral
from .model import Assignment, Instance, evaluate
from .pricing import price_all, xi_forced

FIX_TOL = 1e-6
KAPPA_ENUM_LIMIT = 20


class _TimeUp(Exception):
    pass


@dataclass
class SolverConfig:
    time_limit: float = 3600.0
    fixing: bool = True
    # besides the root and incumbent improvements, rerun fixing every k levels (0: never)
    fixing_period: int = 0
    early_termination: bool = True
    child_order: str = "up"  # "up": open-facility / heavier-side child explored first
    initial_pool: str = "singletons"
    multi_column: bool = False
    # prune when the bound cannot beat the incumbent by a whole unit (integer costs)
    integer_pruning: bool = True
    initial_incumbent: tuple | None = None  # (objective, facility_of or None)
    record_iterations: bool = False
    record_fixes: bool = False
    trace: Callable[[dict], None] | None = None
    node_limit: int | None = None


@dataclass
class NodeState:
    fixes: FixSet
    depth: int
    parent_bound: float
    fix_ref: float = math.inf  # incumbent value when fixing last ran on this path
    id: int = 0


@dataclass
class BranchDecision:
    kind: str  # "y" or "x"
    index: int  # facility for y, customer for x
    children: tuple  # two lists of fixes; the first is the preferred child


@dataclass
class NodeOutcome:
    kind: str  # converged | pruned | infeasible
    bound: float
    solution: object = None
    results: list = field(default_factory=list)
    lagrangian: float = -math.inf


@dataclass
class SolveReport:
    status: str  # optimal | time-limit | infeasible | node-limit
    objective: int | None
    assignment: Assignment | None
    bound: float
    gap: float
    nodes: int
    columns: int
    time_master: float
    time_pricing: float
    time_total: float
    root_bound: float | None = None
    root_converged: bool = False
    iterations: list = field(default_factory=list)
    fix_events: list = field(default_factory=list)
    fixes_made: int = 0

    def stats(self, timings: bool = True) -> dict:
        out = {
            "status": self.status,
            "bound": _num(self.bound),
            "gap": _num(self.gap),
            "root_bound": _num(self.root_bound),
            "nodes": self.nodes,
            "columns": self.columns,
            "fixes": self.fixes_made,
        }
        if timings:
            out.update(
                time=round(self.time_total, 3),
                time_master=round(self.time_master, 3),
                time_pricing=round(self.time_pricing, 3),
            )
        return out


def _num(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return round(float(v), 6)


# -- branching --------------------------------------------------------------------


def _kappa(values: list[float]) -> tuple[float, tuple[int, ...]]:
    """Largest subset sum not above 0.5 and the positions achieving it."""
    k = len(values)
    best, best_set = 0.0, ()
    if k <= KAPPA_ENUM_LIMIT:
        for size in range(1, k + 1):
            for combo in itertools.combinations(range(k), size):
                s = sum(values[t] for t in combo)
                if s <= 0.5 + 1e-9 and s > best + 1e-12:
                    best, best_set = s, combo
        return best, best_set
    chosen = []
    for t in sorted(range(k), key=lambda t: (-values[t], t)):
        if best + values[t] <= 0.5 + 1e-9:
            best += values[t]
            chosen.append(t)
    return best, tuple(sorted(chosen))


def select_branch(x: np.ndarray, y: np.ndarray, tol: float = INTEGRALITY_TOL) -> BranchDecision:
    """Branch on the opening closest to 0.5, else a GUB split of one customer."""
    m, n = x.shape
    frac = [i for i in range(m) if tol < y[i] < 1 - tol]
    if frac:
        i = min(frac, key=lambda i: (abs(y[i] - 0.5), i))
        return BranchDecision("y", i, ([("y1", i)], [("y0", i)]))
    best = None
    for j in range(n):
        m1 = [i for i in range(m) if x[i, j] > tol]
        if len(m1) < 2:
            continue
        kappa, pos = _kappa([float(x[i, j]) for i in m1])
        key = (abs(kappa - 0.5), j)
        if best is None or key < best[0]:
            best = (key, j, m1, pos)
    if best is None:
        raise ValueError("select_branch called on an integral solution")
    _, j, m1, pos = best
    m11 = [m1[t] for t in pos]
    if not m11:
        # every share exceeds 0.5; split off the smallest so both children cut
        m11 = [min(m1, key=lambda i: (x[i, j], i))]
    m12 = [i for i in m1 if i not in m11]
    m2 = [i for i in range(m) if i not in m1]
    half = (len(m2) + 1) // 2
    m21, m22 = m2[:half], m2[half:]
    child_a = [("x0", i, j) for i in sorted(m11 + m21)]
    child_b = [("x0", i, j) for i in sorted(m12 + m22)]
    return BranchDecision("x", j, (child_a, child_b))


# -- solver -------------------------------------------------------------------------


class BranchAndPrice:
    def __init__(self, inst: Instance, config: SolverConfig | None = None):
        self.inst = inst
        self.config = config or SolverConfig()
        if self.config.child_order not in ("up", "down"):
            raise ValueError("child_order must be 'up' or 'down'")
        self.master: MasterState = init_master(inst, initial_pool=self.config.initial_pool)
        self.incumbent: int | float = math.inf
        self.best_assignment: Assignment | None = None
        self.time_master = 0.0
        self.time_pricing = 0.0
        self.iterations: list = []
        self.fix_events: list = []
        self.fixes_made = 0
        self._deadline = math.inf
        if self.config.initial_incumbent is not None:
            obj, facility_of = self.config.initial_incumbent
            self.incumbent = obj
            if facility_of is not None:
                self.best_assignment = Assignment.from_facility_of(inst, facility_of)

    # pruning rule shared by nodes and early termination
    def _dominated(self, bound: float) -> bool:
        if not math.isfinite(self.incumbent):
            return False
        if self.config.integer_pruning:
            return bound > self.incumbent - 1 + FIX_TOL
        return bound > self.incumbent + FIX_TOL

    def _trace(self, **record) -> None:
        if self.config.trace is not None:
            self.config.trace(record)

    def lagrangian_terms(self, results, duals, fixes: FixSet) -> np.ndarray:
        """nu_i = mu_i + min(f_i - xi_i, 0) for priced facilities, mu_i for closed ones.

        A facility fixed open has a free convexity dual, so there the repair
        is mu_i - (xi_i - f_i) without the sign clamp.
        """
        nu = np.array(duals.mu, dtype=float)
        for res in results:
            gap = self.inst.fixed_cost[res.facility] - res.xi
            nu[res.facility] += gap if res.facility in fixes.opened else min(gap, 0.0)
        return nu

    def colgen_at_node(self, node: NodeState) -> NodeOutcome:
        master = self.master
        master.set_fixes(node.fixes)
        rounds = 0
        while True:
            if time.perf_counter() > self._deadline:
                raise _TimeUp
            t0 = time.perf_counter()
            sol = master.solve()
            t1 = time.perf_counter()
            columns, results = price_all(self.inst, sol.duals, node.fixes, self.config.multi_column)
            t2 = time.perf_counter()
            self.time_master += t1 - t0
            self.time_pricing += t2 - t1
            nu = self.lagrangian_terms(results, sol.duals, node.fixes)
            lagrangian = sol.objective + float(nu.sum())
            if self.config.record_iterations:
                self.iterations.append(
                    dict(node=node.id, round=rounds, rmp=sol.objective, lagrangian=lagrangian, new_columns=len(columns))
                )
            if self.config.early_termination and columns and self._dominated(lagrangian):
                return NodeOutcome("pruned", lagrangian, sol, results, lagrangian)
            if not columns:
                break
            master.add_columns(columns)
            rounds += 1
        if master.detect_infeasible(sol.z):
            return NodeOutcome("infeasible", math.inf, sol, results, lagrangian)
        return NodeOutcome("converged", sol.objective, sol, results, lagrangian)

    def fix_variables(self, node: NodeState, outcome: NodeOutcome, x: np.ndarray, y: np.ndarray) -> list:
        """Reduced-cost fixes valid for the subtree of ``node``.

        The duals are first repaired into a feasible solution of the node's
        full master dual (mu' = mu - nu), so the bound used is the Lagrangian
        value; at exact convergence this is the plain LP value.
        """
        if not math.isfinite(self.incumbent):
            return []
        inst = self.inst
        fixes = node.fixes
        duals = outcome.solution.duals
        nu = self.lagrangian_terms(outcome.results, duals, fixes)
        base = outcome.lagrangian
        limit = self.incumbent + FIX_TOL
        xi = {res.facility: res.xi for res in outcome.results}
        new = []
        masks: dict[int, list[int]] = {}
        for i, j in fixes.forbidden:
            masks.setdefault(i, []).append(j)
        t0 = time.perf_counter()
        for i in range(inst.m):
            if i in fixes.closed:
                continue
            mu_fixed = float(duals.mu[i]) - float(nu[i])  # = max(xi - f, 0)
            if i not in fixes.opened:
                if y[i] <= INTEGRALITY_TOL and base + max(inst.fixed_cost[i] - xi[i], 0.0) > limit:
                    new.append(("y0", i))
                    continue
                if y[i] >= 1 - INTEGRALITY_TOL and base + mu_fixed > limit:
                    new.append(("y1", i))
            masked = masks.get(i, [])
            for j in range(inst.n):
                if x[i, j] > INTEGRALITY_TOL or (i, j) in fixes.forbidden:
                    continue
                value = xi_forced(inst, i, j, duals, masked)
                if value == -math.inf or base - value + inst.fixed_cost[i] + mu_fixed > limit:
                    new.append(("x0", i, j))
        self.time_pricing += time.perf_counter() - t0
        return new

    def _integral_incumbent(self, z) -> None:
        facility_of = self.master.assignment_from(z)
        if facility_of is None:
            return
        assignment = Assignment.from_facility_of(self.inst, facility_of)
        ev = evaluate(self.inst, assignment)
        if not ev.feasible:
            raise AssertionError(f"integral master solution violates capacity at {ev.violations}")
        if ev.objective < self.incumbent:
            self.incumbent = ev.objective
            self.best_assignment = assignment

    def solve(self) -> SolveReport:
        cfg = self.config
        start = time.perf_counter()
        self._deadline = start + cfg.time_limit
        root = NodeState(FixSet(), 0, -math.inf, fix_ref=math.inf, id=0)
        stack = [root]
        nodes = 0
        next_id = 1
        status = None
        root_bound = None
        root_converged = False
        current = None
        try:
            while stack:
                if cfg.node_limit is not None and nodes >= cfg.node_limit:
                    status = "node-limit"
                    break
                node = stack.pop()
                current = node
                if self._dominated(node.parent_bound):
                    self._trace(node=node.id, depth=node.depth, bound=node.parent_bound, action="pruned-parent")
                    current = None
                    continue
                nodes += 1
                ncols = len(self.master.columns)
                outcome = self.colgen_at_node(node)
                added = len(self.master.columns) - ncols
                if node.id == 0:
                    root_bound = outcome.bound if outcome.kind != "pruned" else outcome.lagrangian
                    root_converged = outcome.kind == "converged"
                if outcome.kind != "converged":
                    self._trace(node=node.id, depth=node.depth, bound=outcome.bound, action=outcome.kind, columns=added)
                    current = None
                    continue
                bound = outcome.bound
                x, y = self.master.project(outcome.solution.z)
                if is_integral(x, y):
                    self._integral_incumbent(outcome.solution.z)
                    self._trace(node=node.id, depth=node.depth, bound=bound, action="integral", columns=added,
                                incumbent=self.incumbent)
                    current = None
                    continue
                if self._dominated(bound):
                    self._trace(node=node.id, depth=node.depth, bound=bound, action="pruned-bound", columns=added)
                    current = None
                    continue
                fixes = node.fixes
                fix_ref = node.fix_ref
                run_fixing = cfg.fixing and math.isfinite(self.incumbent) and (
                    node.id == 0
                    or self.incumbent < node.fix_ref
                    or (cfg.fixing_period and node.depth % cfg.fixing_period == 0)
                )
                if run_fixing:
                    new = self.fix_variables(node, outcome, x, y)
                    if cfg.record_fixes and new:
                        self.fix_events.append((node.fixes, tuple(new)))
                    self.fixes_made += len(new)
                    fixes = fixes.extend(new)
                    fix_ref = self.incumbent
                decision = select_branch(x, y)
                children = []
                for branch in decision.children:
                    try:
                        children.append(fixes.extend(branch))
                    except ContradictoryFix:
                        children.append(None)
                if cfg.child_order == "down":
                    children.reverse()
                for child in reversed(children):
                    if child is None:
                        continue
                    stack.append(NodeState(child, node.depth + 1, bound, fix_ref, next_id))
                    next_id += 1
                self._trace(node=node.id, depth=node.depth, bound=bound, action=f"branch-{decision.kind}",
                            index=decision.index, columns=added)
                current = None
        except _TimeUp:
            status = "time-limit"
        elapsed = time.perf_counter() - start

        open_bounds = [nd.parent_bound for nd in stack]
        if current is not None:
            open_bounds.append(current.parent_bound)
        if status is None:
            if math.isfinite(self.incumbent):
                status, bound = "optimal", float(self.incumbent)
            else:
                status, bound = "infeasible", math.inf
        elif root_bound is None or not root_converged:
            bound = -math.inf
        else:
            # every open node is bounded by its parent and by the root
            bound = min([float(self.incumbent), *(max(b, root_bound) for b in open_bounds)])
        objective = int(self.incumbent) if math.isfinite(self.incumbent) else None
        if objective is None or not math.isfinite(bound):
            gap = math.inf if objective is None else math.nan
        else:
            gap = (objective - bound) / objective * 100 if objective else 0.0
        return SolveReport(
            status=status,
            objective=objective,
            assignment=self.best_assignment,
            bound=bound,
            gap=gap,
            nodes=nodes,
            columns=len(self.master.columns),
            time_master=self.time_master,
            time_pricing=self.time_pricing,
            time_total=elapsed,
            root_bound=root_bound,
            root_converged=root_converged,
            iterations=self.iterations,
            fix_events=self.fix_events,
            fixes_made=self.fixes_made,
        )


def solve(inst: Instance, config: SolverConfig | None = None) -> SolveReport:
    return BranchAndPrice(inst, config).solve()


def jsonl_tracer(fh) -> Callable[[dict], None]:
    def emit(record: dict) -> None:
        fh.write(json.dumps(record, default=float) + "\n")

    return emit
