"""Bounded-variable primal simplex with a dense basis inverse.

Every row ``a x (>=|=) rhs`` gets a slack ``s`` with ``a x - s = rhs``; the
slack is bounded by ``[0, inf)`` for ``>=`` rows and ``[0, 0]`` for ``=``
rows, so switching a row sense is just a bound change.  The basis is kept
between solves.  Each solve starts from the current basis and repairs primal
infeasibility by minimizing the sum of bound violations, which makes column
additions, bound changes and sense changes cheap to re-solve.

Structural variables need finite lower bounds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BASIC, AT_LOWER, AT_UPPER = 0, 1, 2

PRIMAL_TOL = 1e-7
DUAL_TOL = 1e-7
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
BLAND_AFTER = 50


class LpError(RuntimeError):
    pass


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    objective: float
    primal: np.ndarray
    dual: np.ndarray
    reduced_cost: np.ndarray
    iterations: int


class LinearProgram:
    """``min c x`` subject to rows with sense ``>=`` or ``=`` and bounds on x."""

    def __init__(self, senses, rhs):
        senses = list(senses)
        if len(senses) != len(rhs):
            raise ValueError("senses and rhs differ in length")
        self.nrows = len(senses)
        self.b = np.asarray(rhs, dtype=float).copy()
        self.ncols = 0
        cap = 16
        self._a = np.zeros((self.nrows, cap))
        nv = self.nrows + cap
        self._cost = np.zeros(nv)
        self._lb = np.zeros(nv)
        self._ub = np.full(nv, np.inf)
        self._x = np.zeros(nv)
        self._state = np.full(nv, AT_LOWER, dtype=np.int8)
        for r, s in enumerate(senses):
            self._check_sense(s)
            if s == "=":
                self._ub[r] = 0.0
        self.basis = np.arange(self.nrows)
        self._state[: self.nrows] = BASIC
        self._binv = -np.eye(self.nrows)
        self.iterations = 0
        self.last: LpSolution | None = None

    @staticmethod
    def _check_sense(s):
        if s not in (">=", "="):
            raise ValueError(f"unsupported row sense {s!r}")

    @property
    def nvars(self) -> int:
        return self.nrows + self.ncols

    # -- problem modification ------------------------------------------------

    def _grow(self, extra: int) -> None:
        cap = self._a.shape[1]
        if self.ncols + extra <= cap:
            return
        new_cap = max(2 * cap, self.ncols + extra)
        a = np.zeros((self.nrows, new_cap))
        a[:, : self.ncols] = self._a[:, : self.ncols]
        self._a = a
        nv_old, nv_new = self.nrows + cap, self.nrows + new_cap

        def widen(arr, fill):
            out = np.full(nv_new, fill, dtype=arr.dtype)
            out[:nv_old] = arr
            return out

        self._cost = widen(self._cost, 0.0)
        self._lb = widen(self._lb, 0.0)
        self._ub = widen(self._ub, np.inf)
        self._x = widen(self._x, 0.0)
        self._state = widen(self._state, AT_LOWER)

    def add_columns(self, cost, coefs, lower=None, upper=None) -> range:
        """Append columns; ``coefs`` has shape (nrows, k).  Returns their indices.

        New columns start nonbasic at their lower bound, so a primal feasible
        basis stays primal feasible.
        """
        cost = np.atleast_1d(np.asarray(cost, dtype=float))
        coefs = np.asarray(coefs, dtype=float)
        if coefs.ndim == 1:
            coefs = coefs[:, None]
        k = len(cost)
        if coefs.shape != (self.nrows, k):
            raise ValueError(f"expected coefficients of shape {(self.nrows, k)}, got {coefs.shape}")
        lower = np.zeros(k) if lower is None else np.broadcast_to(np.asarray(lower, float), (k,))
        upper = np.full(k, np.inf) if upper is None else np.broadcast_to(np.asarray(upper, float), (k,))
        if not np.all(np.isfinite(lower)):
            raise ValueError("lower bounds must be finite")
        if np.any(lower > upper):
            raise ValueError("lower bound above upper bound")
        self._grow(k)
        c0 = self.ncols
        self._a[:, c0 : c0 + k] = coefs
        v = slice(self.nrows + c0, self.nrows + c0 + k)
        self._cost[v] = cost
        self._lb[v] = lower
        self._ub[v] = upper
        self._x[v] = lower
        self._state[v] = AT_LOWER
        self.ncols += k
        return range(c0, c0 + k)

    def set_bounds(self, col: int, lower: float | None = None, upper: float | None = None) -> None:
        k = self.nrows + col
        if lower is not None:
            if not np.isfinite(lower):
                raise ValueError("lower bounds must be finite")
            self._lb[k] = lower
        if upper is not None:
            self._ub[k] = upper
        self._place_nonbasic(k)

    def set_column_upper(self, col: int, value: float) -> None:
        self.set_bounds(col, upper=value)

    def set_column_uppers(self, uppers) -> None:
        """Vectorized upper-bound reset for all structural columns."""
        uppers = np.asarray(uppers, dtype=float)
        v = slice(self.nrows, self.nvars)
        self._ub[v] = uppers
        idx = np.arange(self.nrows, self.nvars)
        nb = self._state[v] != BASIC
        at_up = self._state[v] == AT_UPPER
        fix = idx[nb & at_up & ~np.isfinite(uppers)]
        self._state[fix] = AT_LOWER
        lo = idx[nb & (self._state[v] == AT_LOWER)]
        self._x[lo] = self._lb[lo]
        up = idx[nb & (self._state[v] == AT_UPPER)]
        self._x[up] = self._ub[up]

    def set_row_sense(self, row: int, sense: str) -> None:
        self._check_sense(sense)
        self._ub[row] = 0.0 if sense == "=" else np.inf
        self._place_nonbasic(row)

    def row_sense(self, row: int) -> str:
        return "=" if self._ub[row] == 0.0 else ">="

    def _place_nonbasic(self, k: int) -> None:
        if self._state[k] == BASIC:
            return
        if self._state[k] == AT_UPPER and np.isfinite(self._ub[k]):
            self._x[k] = self._ub[k]
        else:
            self._state[k] = AT_LOWER
            self._x[k] = self._lb[k]

    def column(self, col: int) -> np.ndarray:
        return self._a[:, col].copy()

    def cost(self, col: int) -> float:
        return float(self._cost[self.nrows + col])

    def upper(self, col: int) -> float:
        return float(self._ub[self.nrows + col])

    # -- warm start ----------------------------------------------------------

    def get_basis(self) -> tuple[np.ndarray, np.ndarray]:
        return self.basis.copy(), self._state[: self.nvars].copy()

    def set_basis(self, basis) -> None:
        rows, state = basis
        self.basis = np.asarray(rows).copy()
        self._state[: len(state)] = state
        for k in range(self.nvars):
            self._place_nonbasic(k)

    def reset_basis(self) -> None:
        self._state[: self.nvars] = AT_LOWER
        self.basis = np.arange(self.nrows)
        self._state[: self.nrows] = BASIC
        for k in range(self.nvars):
            self._place_nonbasic(k)

    # -- simplex ---------------------------------------------------------------

    def _column_of(self, k: int) -> np.ndarray:
        if k < self.nrows:
            col = np.zeros(self.nrows)
            col[k] = -1.0
            return col
        return self._a[:, k - self.nrows]

    def _refactor(self) -> None:
        bmat = np.empty((self.nrows, self.nrows))
        for r, k in enumerate(self.basis):
            bmat[:, r] = self._column_of(k)
        try:
            self._binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise LpError("singular basis") from exc
        nv = self.nvars
        xn = self._x[:nv].copy()
        xn[self.basis] = 0.0
        resid = self.b - self._a[:, : self.ncols] @ xn[self.nrows :] + xn[: self.nrows]
        self._x[self.basis] = self._binv @ resid

    def solve(self, max_iter: int | None = None) -> LpSolution:
        nr, nv = self.nrows, self.nvars
        if max_iter is None:
            max_iter = 50 * (nr + nv) + 10000
        a = self._a[:, : self.ncols]
        cost, lb, ub, x, state = self._cost[:nv], self._lb[:nv], self._ub[:nv], self._x, self._state[:nv]
        self._refactor()
        since_refactor = 0
        degenerate_run = 0
        iters = 0
        status = None
        y = np.zeros(nr)
        d = np.zeros(nv)
        while True:
            if since_refactor >= REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0
            basis = self.basis
            xb = x[basis]
            below = xb < lb[basis] - PRIMAL_TOL
            above = xb > ub[basis] + PRIMAL_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = np.where(below, -1.0, np.where(above, 1.0, 0.0))
            else:
                cb = cost[basis]
            y = cb @ self._binv
            d = np.empty(nv)
            d[:nr] = y
            d[nr:] = (0.0 if phase1 else cost[nr:]) - y @ a
            d[basis] = 0.0
            up = (state == AT_LOWER) & (d < -DUAL_TOL) & (ub > lb)
            down = (state == AT_UPPER) & (d > DUAL_TOL)
            eligible = up | down
            if not eligible.any():
                if since_refactor > 0:
                    # confirm on a fresh factorization before declaring optimality
                    self._refactor()
                    since_refactor = 0
                    continue
                status = "infeasible" if phase1 else "optimal"
                break
            if iters >= max_iter:
                raise LpError(f"simplex iteration limit {max_iter} reached")
            bland = degenerate_run >= BLAND_AFTER
            if bland:
                q = int(np.flatnonzero(eligible)[0])
            else:
                q = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if up[q] else -1.0
            alpha = self._binv @ self._column_of(q)
            delta = -direction * alpha  # change of basic values per unit step

            lbb, ubb = lb[basis], ub[basis]
            moving = np.abs(delta) > PIVOT_TOL
            dec = moving & (delta < 0)
            inc = moving & (delta > 0)
            target = np.full(nr, np.nan)
            # decreasing basics block at their lower bound, or at the upper
            # bound when currently above it; below-lower ones never block
            target[dec] = np.where(above[dec], ubb[dec], np.where(below[dec], -np.inf, lbb[dec]))
            target[inc] = np.where(below[inc], lbb[inc], np.where(above[inc], np.inf, ubb[inc]))
            blocks = moving & np.isfinite(target)
            flip = ub[q] - lb[q]
            r = -1
            theta = np.inf
            if blocks.any():
                idx = np.flatnonzero(blocks)
                dist = np.abs(target[idx] - xb[idx])
                # infeasible basics moving toward their bound have the right sign already
                dist = np.where(
                    (delta[idx] < 0) & (xb[idx] < target[idx]) | (delta[idx] > 0) & (xb[idx] > target[idx]),
                    0.0,
                    dist,
                )
                mag = np.abs(delta[idx])
                ratios = dist / mag
                if bland:
                    tmin = ratios.min()
                    ties = idx[ratios <= tmin + 1e-12]
                    r = int(ties[np.argmin(basis[ties])])
                    theta = float(ratios[np.flatnonzero(idx == r)[0]])
                else:
                    relaxed = (dist + PRIMAL_TOL) / mag
                    tmax = relaxed.min()
                    cand = ratios <= tmax
                    pick = np.flatnonzero(cand)[np.argmax(mag[cand])]
                    r = int(idx[pick])
                    theta = float(max(ratios[pick], 0.0))
            if flip <= theta:
                if not np.isfinite(flip):
                    if phase1:
                        raise LpError("phase one ray without blocking variable")
                    status = "unbounded"
                    break
                theta = flip
                x[basis] = xb + delta * theta
                if direction > 0:
                    state[q] = AT_UPPER
                    x[q] = ub[q]
                else:
                    state[q] = AT_LOWER
                    x[q] = lb[q]
            elif r < 0:
                if phase1:
                    raise LpError("phase one ray without blocking variable")
                status = "unbounded"
                break
            else:
                p = int(basis[r])
                x[basis] = xb + delta * theta
                x[q] = x[q] + direction * theta
                tgt = target[r]
                x[p] = tgt
                state[p] = AT_LOWER if tgt == lb[p] else AT_UPPER
                piv = alpha[r]
                row_r = self._binv[r] / piv
                self._binv -= np.outer(alpha, row_r)
                self._binv[r] = row_r
                basis[r] = q
                state[q] = BASIC
                since_refactor += 1
            iters += 1
            degenerate_run = degenerate_run + 1 if theta <= 1e-12 else 0

        self.iterations += iters
        primal = x[nr:nv].copy()
        objective = float(cost[nr:] @ primal) if status == "optimal" else float("nan")
        sol = LpSolution(status, objective, primal, y.copy(), d[nr:].copy(), iters)
        self.last = sol
        self._y = y.copy()
        self._d = d.copy()
        return sol

    # -- diagnostics -------------------------------------------------------------

    def duality_gap(self) -> float:
        """|c x - (y b + bound terms)| for the last optimal solve."""
        nr, nv = self.nrows, self.nvars
        d = self._d
        nb = self._state[:nv] != BASIC
        bound_term = float(np.sum(d[nb] * self._x[:nv][nb]))
        primal = float(self._cost[nr:nv] @ self._x[nr:nv])
        return abs(primal - (float(self._y @ self.b) + bound_term))

    def dump(self) -> str:
        lines = [f"rows {self.nrows} cols {self.ncols} iterations {self.iterations}"]
        for r in range(self.nrows):
            lines.append(f"row {r} {self.row_sense(r)} {self.b[r]:g}")
        for c in range(self.ncols):
            k = self.nrows + c
            nz = {r: v for r, v in enumerate(self._a[:, c]) if v}
            st = {BASIC: "B", AT_LOWER: "L", AT_UPPER: "U"}[int(self._state[k])]
            lines.append(
                f"col {c} cost {self._cost[k]:g} bounds [{self._lb[k]:g},{self._ub[k]:g}] {st} x={self._x[k]:.6g} {nz}"
            )
        return "\n".join(lines) + "\n"
