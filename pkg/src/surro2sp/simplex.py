"""Dense bounded-variable primal simplex.

Solves  min c'x  s.t.  A x {<=,=,>=} b,  lower <= x <= upper  with a
two-phase method: phase 1 drives the sum of bound violations of the basic
variables to zero (no artificial columns; every row gets a slack whose
bounds encode the relation), phase 2 optimizes the true objective from the
feasible basis.  The tableau is kept dense, which is the right trade-off
for the model sizes this package produces (a few hundred rows).

Warm starts are supported by passing a previously returned basis, which is
what makes repeated solves of structurally identical models cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

# Relation codes for constraint rows.
LE, EQ, GE = -1, 0, 1

# Nonbasic variable states.
_AT_LO, _AT_HI, _FREE, _BASIC = 0, 1, 2, 3


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpError(Exception):
    """Base class for solver failures."""


class IterationLimitError(LpError):
    """The pivot loop exceeded its iteration budget without converging."""


class NumericalError(LpError):
    """The tableau degraded beyond repair."""


def _as_float_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


@dataclass
class LinearProgram:
    """Minimization LP over bounded variables.

    ``relations`` holds one of LE, EQ, GE per row.  Bounds may be infinite;
    ``lower[i] <= upper[i]`` is required and checked at construction.
    ``offset`` is a constant added to every reported objective value.
    """

    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    a_matrix: np.ndarray
    relations: np.ndarray
    rhs: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        self.objective = _as_float_array(self.objective, "objective", 1)
        self.lower = _as_float_array(self.lower, "lower", 1)
        self.upper = _as_float_array(self.upper, "upper", 1)
        n = self.objective.shape[0]
        if self.lower.shape[0] != n or self.upper.shape[0] != n:
            raise ValueError("bound vectors must match objective length")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise ValueError(
                f"variable {bad} has lower bound {self.lower[bad]} above upper "
                f"bound {self.upper[bad]}"
            )
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective coefficients must be finite")
        self.a_matrix = np.ascontiguousarray(
            _as_float_array(self.a_matrix, "a_matrix", 2)
        )
        m = self.a_matrix.shape[0]
        if self.a_matrix.shape[1] != n:
            raise ValueError(
                f"constraint matrix has {self.a_matrix.shape[1]} columns, "
                f"expected {n}"
            )
        if not np.all(np.isfinite(self.a_matrix)):
            raise ValueError("constraint coefficients must be finite")
        self.relations = np.asarray(self.relations, dtype=np.int8)
        if self.relations.shape != (m,):
            raise ValueError("relations must have one entry per row")
        if not np.all(np.isin(self.relations, (LE, EQ, GE))):
            raise ValueError("relations must be LE, EQ or GE")
        self.rhs = _as_float_array(self.rhs, "rhs", 1)
        if self.rhs.shape != (m,):
            raise ValueError("rhs must have one entry per row")
        if not np.all(np.isfinite(self.rhs)):
            raise ValueError("rhs entries must be finite")

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.a_matrix.shape[0]


@dataclass
class SimplexStart:
    """Basis snapshot for warm starting a structurally identical model.

    ``tableau``/``basis_inverse`` may carry precomputed factors of the same
    basis; callers that solve one matrix with many right-hand sides cache
    them to skip the dense refactorization.
    """

    basis: np.ndarray
    state: np.ndarray
    tableau: Optional[np.ndarray] = None
    basis_inverse: Optional[np.ndarray] = None


@dataclass
class LpOutcome:
    status: LpStatus
    objective: float
    x: Optional[np.ndarray]
    iterations: int = 0
    start: Optional[SimplexStart] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


def solve_lp(
    lp: LinearProgram,
    tol: float = 1e-7,
    pivot_tol: float = 1e-9,
    max_iters: Optional[int] = None,
    start: Optional[SimplexStart] = None,
    bland_threshold: int = 60,
) -> LpOutcome:
    """Solve ``lp`` to optimality, or certify infeasibility/unboundedness.

    ``tol`` is the primal feasibility tolerance, ``pivot_tol`` the smallest
    tableau entry accepted as a pivot.  ``bland_threshold`` is the number of
    consecutive degenerate pivots tolerated before falling back to Bland's
    rule.  Raises :class:`IterationLimitError` when the pivot budget runs
    out.  Deterministic: identical inputs give identical outcomes.
    """
    return _BoundedSimplex(lp, tol, pivot_tol, max_iters, bland_threshold).solve(start)


class _BoundedSimplex:
    def __init__(self, lp, tol, pivot_tol, max_iters, bland_threshold):
        self.lp = lp
        self.tol = tol
        self.pivot_tol = pivot_tol
        n, m = lp.n_vars, lp.n_rows
        self.n, self.m = n, m
        self.total = n + m
        if max_iters is None:
            max_iters = 50 * (n + m) + 10_000
        self.max_iters = max_iters
        self.bland_threshold = bland_threshold

        # Standard form: one slack per row, bounds encoding the relation.
        self.c = np.concatenate([lp.objective, np.zeros(m)])
        self.lb = np.concatenate([lp.lower, np.zeros(m)])
        self.ub = np.concatenate([lp.upper, np.zeros(m)])
        sel_le = lp.relations == LE
        sel_ge = lp.relations == GE
        self.ub[n:][sel_le] = np.inf
        self.lb[n:][sel_ge] = -np.inf
        self.b = lp.rhs
        # Reduced-cost cutoffs, scaled to the objective magnitude in phase 2.
        self.dual_tol_ph1 = 1e-9
        cmax = float(np.max(np.abs(self.c))) if self.c.size else 0.0
        self.dual_tol_ph2 = 1e-9 * max(1.0, cmax)

    # -- state initialisation -------------------------------------------

    def _cold_start(self):
        n, m = self.n, self.m
        self.basis = np.arange(n, n + m)
        self.state = np.empty(self.total, dtype=np.int8)
        lo_fin = np.isfinite(self.lb)
        hi_fin = np.isfinite(self.ub)
        self.state[:] = _FREE
        self.state[lo_fin & ~hi_fin] = _AT_LO
        self.state[~lo_fin & hi_fin] = _AT_HI
        both = lo_fin & hi_fin
        prefer_lo = np.abs(self.lb) <= np.abs(self.ub)
        self.state[both & prefer_lo] = _AT_LO
        self.state[both & ~prefer_lo] = _AT_HI
        self.state[self.basis] = _BASIC
        self.tableau = np.empty((m, self.total))
        self.tableau[:, :n] = self.lp.a_matrix
        self.tableau[:, n:] = np.eye(m)
        xn = self._nonbasic_values()
        self.xb = self.b - self.lp.a_matrix @ xn[:n]

    def _warm_start(self, start: SimplexStart) -> bool:
        n, m = self.n, self.m
        basis = np.asarray(start.basis, dtype=int)
        if basis.shape != (m,) or len(set(basis.tolist())) != m:
            return False
        if np.any(basis < 0) or np.any(basis >= self.total):
            return False
        state = np.asarray(start.state, dtype=np.int8).copy()
        if state.shape != (self.total,):
            return False
        # Repair states that disagree with the (possibly patched) bounds.
        at_lo = state == _AT_LO
        at_hi = state == _AT_HI
        state[at_lo & ~np.isfinite(self.lb)] = _FREE
        state[at_hi & ~np.isfinite(self.ub)] = _FREE
        state[basis] = _BASIC
        if start.tableau is not None:
            self.tableau = start.tableau.copy()
            binv = start.basis_inverse
        else:
            a_std = np.empty((m, self.total))
            a_std[:, :n] = self.lp.a_matrix
            a_std[:, n:] = np.eye(m)
            bmat = a_std[:, basis]
            try:
                binv = np.linalg.inv(bmat)
            except np.linalg.LinAlgError:
                return False
            self.tableau = binv @ a_std
        self.basis = basis.copy()
        self.state = state
        xn = self._nonbasic_values()
        r = self.b - self.lp.a_matrix @ xn[:n] - xn[n:]
        if binv is not None:
            self.xb = binv @ r
        else:
            a_std = np.empty((m, self.total))
            a_std[:, :n] = self.lp.a_matrix
            a_std[:, n:] = np.eye(m)
            try:
                self.xb = np.linalg.solve(a_std[:, basis], r)
            except np.linalg.LinAlgError:
                return False
        if not np.all(np.isfinite(self.xb)):
            return False
        return True

    def _nonbasic_values(self) -> np.ndarray:
        xn = np.zeros(self.total)
        sel = self.state == _AT_LO
        xn[sel] = self.lb[sel]
        sel = self.state == _AT_HI
        xn[sel] = self.ub[sel]
        return xn

    # -- main loop -------------------------------------------------------

    def solve(self, start: Optional[SimplexStart]) -> LpOutcome:
        if start is None or not self._warm_start(start):
            self._cold_start()

        iters = 0
        degen_streak = 0
        bland = False
        d2: Optional[np.ndarray] = None
        d2_age = 0

        while True:
            if iters > self.max_iters:
                raise IterationLimitError(
                    f"simplex exceeded {self.max_iters} pivots "
                    f"({self.m} rows, {self.n} vars)"
                )
            iters += 1

            lb_b = self.lb[self.basis]
            ub_b = self.ub[self.basis]
            below = self.xb < lb_b - self.tol
            above = self.xb > ub_b + self.tol
            infeasible = bool(below.any() or above.any())

            if infeasible:
                cb = above.astype(float) - below.astype(float)
                d = -(cb @ self.tableau)
                d2 = None
                dual_tol = self.dual_tol_ph1
            else:
                if d2 is None or d2_age >= 128:
                    d2 = self.c - self.c[self.basis] @ self.tableau
                    d2_age = 0
                d = d2
                dual_tol = self.dual_tol_ph2

            q, direction = self._price(d, bland, dual_tol)
            if q < 0:
                if infeasible:
                    return self._finish(LpStatus.INFEASIBLE, iters)
                return self._finish(LpStatus.OPTIMAL, iters)

            step, row, leave_state = self._ratio_test(
                q, direction, below, above, bland
            )
            if step is None:
                if infeasible:
                    raise NumericalError(
                        "phase 1 produced an unbounded infeasibility ray"
                    )
                return self._finish(LpStatus.UNBOUNDED, iters)

            if step < 1e-11:
                degen_streak += 1
                if degen_streak > self.bland_threshold:
                    bland = True
            else:
                degen_streak = 0
                bland = False

            col = self.tableau[:, q]
            if row < 0:
                # Bound flip: the entering variable traverses its range and
                # the reduced costs are unchanged.
                self.xb -= direction * step * col
                self.state[q] = _AT_HI if self.state[q] == _AT_LO else _AT_LO
                continue

            # Pivot: basis[row] leaves at `leave_state`, q enters.
            if self.state[q] == _AT_LO:
                enter_val = self.lb[q]
            elif self.state[q] == _AT_HI:
                enter_val = self.ub[q]
            else:
                enter_val = 0.0
            self.xb -= direction * step * col
            leaving = self.basis[row]
            self.state[leaving] = leave_state
            self.state[q] = _BASIC
            self.basis[row] = q

            piv = self.tableau[row, q]
            prow = self.tableau[row]
            prow /= piv
            colc = col.copy()
            colc[row] = 0.0
            self.tableau -= np.outer(colc, prow)
            self.tableau[:, q] = 0.0
            self.tableau[row, q] = 1.0
            self.xb[row] = enter_val + direction * step
            if d2 is not None:
                d2 = d2 - d2[q] * prow
                d2[q] = 0.0
                d2_age += 1

    def _price(self, d, bland, dual_tol):
        score = np.zeros(self.total)
        at_lo = self.state == _AT_LO
        at_hi = self.state == _AT_HI
        free = self.state == _FREE
        score[at_lo] = -d[at_lo]
        score[at_hi] = d[at_hi]
        score[free] = np.abs(d[free])
        eligible = score > dual_tol
        if not eligible.any():
            return -1, 0
        if bland:
            q = int(np.argmax(eligible))
        else:
            q = int(np.argmax(score))
        if self.state[q] == _AT_LO:
            return q, 1
        if self.state[q] == _AT_HI:
            return q, -1
        return q, (1 if d[q] < 0 else -1)

    def _ratio_test(self, q, direction, below, above, bland):
        col = self.tableau[:, q]
        rate = -direction * col
        lb_b = self.lb[self.basis]
        ub_b = self.ub[self.basis]
        sig = np.abs(col) > self.pivot_tol

        t = np.full(self.m, np.inf)
        leave = np.full(self.m, _AT_LO, dtype=np.int8)

        feas = ~(below | above)
        # Feasible basics block at the bound they move towards.
        sel = feas & sig & (rate > 0) & np.isfinite(ub_b)
        t[sel] = (ub_b[sel] - self.xb[sel]) / rate[sel]
        leave[sel] = _AT_HI
        sel = feas & sig & (rate < 0) & np.isfinite(lb_b)
        t[sel] = (self.xb[sel] - lb_b[sel]) / (-rate[sel])
        leave[sel] = _AT_LO
        # Violated basics block when they re-enter their range.
        sel = below & sig & (rate > 0)
        t[sel] = (lb_b[sel] - self.xb[sel]) / rate[sel]
        leave[sel] = _AT_LO
        sel = above & sig & (rate < 0)
        t[sel] = (self.xb[sel] - ub_b[sel]) / (-rate[sel])
        leave[sel] = _AT_HI
        np.maximum(t, 0.0, out=t)

        span = self.ub[q] - self.lb[q]
        flip_t = span if (self.state[q] != _FREE and np.isfinite(span)) else np.inf

        t_min = t.min() if self.m else np.inf
        best = min(t_min, flip_t)
        if not np.isfinite(best):
            return None, -1, _AT_LO
        if flip_t <= t_min:
            return flip_t, -1, _AT_LO

        near = t <= t_min + 1e-10 * (1.0 + t_min)
        rows = np.nonzero(near)[0]
        if bland:
            row = int(rows[np.argmin(self.basis[rows])])
        else:
            row = int(rows[np.argmax(np.abs(col[rows]))])
        return t_min, row, int(leave[row])

    # -- wrap-up ----------------------------------------------------------

    def _finish(self, status: LpStatus, iters: int) -> LpOutcome:
        if status != LpStatus.OPTIMAL:
            return LpOutcome(status, np.inf if status == LpStatus.INFEASIBLE else -np.inf, None, iters)

        x = self._nonbasic_values()
        x[self.basis] = self.xb
        resid = self._residual(x)
        if resid > 0.5 * self.tol:
            # Refresh the basic values from the original data; the tableau
            # accumulates roundoff over long pivot sequences.
            n = self.n
            a_std = np.empty((self.m, self.total))
            a_std[:, :n] = self.lp.a_matrix
            a_std[:, n:] = np.eye(self.m)
            xn = self._nonbasic_values()
            r = self.b - a_std @ xn
            try:
                self.xb = np.linalg.solve(a_std[:, self.basis], r)
            except np.linalg.LinAlgError as exc:
                raise NumericalError("singular final basis") from exc
            x = xn
            x[self.basis] = self.xb
            resid = self._residual(x)
            if resid > 10.0 * self.tol:
                raise NumericalError(
                    f"final residual {resid:.3e} exceeds tolerance"
                )
        obj = float(self.c @ x + self.lp.offset)
        start = SimplexStart(self.basis.copy(), self.state.copy())
        return LpOutcome(LpStatus.OPTIMAL, obj, x[: self.n].copy(), iters, start)

    def _residual(self, x: np.ndarray) -> float:
        lhs = self.lp.a_matrix @ x[: self.n] + x[self.n:]
        return float(np.max(np.abs(lhs - self.b))) if self.m else 0.0
