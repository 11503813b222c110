"""Bounded-variable primal simplex over the equality form A x + s = b.

Every row carries a slack column whose bounds encode the relation
(<=: [0, inf), >=: (-inf, 0], =: [0, 0]); zero-width equality slacks play
the role of the classic artificials. Phase 1 minimizes the total bound
violation of the basic set, which works from the cold slack basis and from
any warm basis alike; once the basis is feasible the loop prices the real
objective. Dense revised implementation: explicit basis inverse with eta
updates, refactorization every REFACTOR_PERIOD pivots, Dantzig pricing
with a switch to Bland's rule after BLAND_TRIGGER degenerate pivots.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import INF, ProblemInstance

DEFAULT_ITERATION_CAP = 50_000
REFACTOR_PERIOD = 100
BLAND_TRIGGER = 5000

_DUAL_TOL = 1e-7
_PIVOT_TOL = 1e-9
_FEAS_DECL_TOL = 1e-7
_BOUND_DUST = 1e-9

BASIC, AT_LOWER, AT_UPPER, FREE = 0, 1, 2, 3


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class Basis:
    """Warm-start capsule: basic column list plus a per-column status tag."""

    basic: np.ndarray     # m column indices into [structural | slack] space
    status: np.ndarray    # int8 per column: BASIC/AT_LOWER/AT_UPPER/FREE


@dataclass
class LPResult:
    status: LPStatus
    point: np.ndarray     # structural variable values
    objective: float
    iterations: int
    basis: Basis | None = None


@dataclass
class LPRelaxation:
    """An instance viewed continuously, with optional per-solve edits."""

    instance: ProblemInstance
    bound_overrides: dict[int, tuple[float, float]] | None = None
    objective_override: tuple[np.ndarray, float] | None = None


def solve_lp(relaxation: LPRelaxation, warm_basis: Basis | None = None,
             iteration_cap: int = DEFAULT_ITERATION_CAP) -> LPResult:
    ws = SimplexWorkspace(relaxation.instance)
    return ws.solve(bound_overrides=relaxation.bound_overrides,
                    objective_override=relaxation.objective_override,
                    warm_basis=warm_basis, iteration_cap=iteration_cap)


class SimplexWorkspace:
    """Reusable solver state for many solves over one instance shape."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        n, m = instance.num_vars, instance.num_rows
        self.n, self.m = n, m
        if m:
            self.Afull = np.hstack([instance.matrix, np.eye(m)])
        else:
            self.Afull = np.zeros((0, n))
        rel = instance.row_relations
        self.slack_lo = np.where(rel == 2, -INF, 0.0)
        self.slack_hi = np.where(rel == 0, INF, 0.0)
        self.lp_solves = 0

    # -- public entry ------------------------------------------------------

    def solve(self, bound_overrides=None, objective_override=None,
              warm_basis: Basis | None = None,
              iteration_cap: int = DEFAULT_ITERATION_CAP,
              rhs_override=None) -> LPResult:
        self.lp_solves += 1
        n, m = self.n, self.m
        N = n + m

        lo = np.concatenate([self.instance.lower_bounds, self.slack_lo])
        hi = np.concatenate([self.instance.upper_bounds, self.slack_hi])
        if bound_overrides:
            for j, (lj, hj) in bound_overrides.items():
                lo[j], hi[j] = lj, hj
        if objective_override is not None:
            c_struct, const = objective_override
            c_struct = np.asarray(c_struct, dtype=float)
        else:
            c_struct, const = self.instance.objective, self.instance.objective_constant
        c = np.zeros(N)
        c[:n] = c_struct
        b = np.asarray(rhs_override, dtype=float) if rhs_override is not None \
            else self.instance.row_rhs

        if np.any(lo[:n] > hi[:n] + 1e-9):
            point = np.clip(np.zeros(n), np.minimum(lo[:n], hi[:n]), None)
            return LPResult(LPStatus.INFEASIBLE, point,
                            float(c_struct @ point) + const, 0, None)

        if m == 0:
            return self._solve_unconstrained(lo[:n], hi[:n], c_struct, const)

        basis, status = self._initial_basis(warm_basis, lo, hi)
        Binv = self._factorize(basis)
        if Binv is None:
            basis, status = self._cold_basis(lo, hi)
            Binv = np.eye(m)

        bland = False
        degenerate = 0
        pivots_since_refactor = 0
        iterations = 0

        while iterations < iteration_cap:
            if pivots_since_refactor >= REFACTOR_PERIOD:
                fresh = self._factorize(basis)
                if fresh is None:
                    basis, status = self._cold_basis(lo, hi)
                    fresh = np.eye(m)
                Binv = fresh
                pivots_since_refactor = 0

            xval = self._nonbasic_values(status, lo, hi)
            resid = b - self.Afull @ xval
            x_b = Binv @ resid
            xval[basis] = x_b

            blo, bhi = lo[basis], hi[basis]
            below = np.maximum(0.0, blo - x_b)
            above = np.maximum(0.0, x_b - bhi)
            # Rounding can park a basic a few ulps past its bound. Counting
            # that as a violation flips the phase-1 gradient between visits
            # to the same degenerate vertex, which defeats the anti-cycling
            # rule (it assumes a fixed objective). Treat sub-dust overshoot
            # as on-the-bound everywhere: pricing, phase choice, ratio test.
            below[below <= _BOUND_DUST] = 0.0
            above[above <= _BOUND_DUST] = 0.0
            total_infeas = float(below.sum() + above.sum())
            phase = 1 if total_infeas > 1e-9 else 2

            if phase == 1:
                grad = np.where(above > 0, 1.0, np.where(below > 0, -1.0, 0.0))
                y = Binv.T @ grad
                d = -(self.Afull.T @ y)
            else:
                y = Binv.T @ c[basis]
                d = c - self.Afull.T @ y

            entering = self._choose_entering(d, status, lo, hi, bland)
            if entering is None:
                if phase == 1:
                    if total_infeas > _FEAS_DECL_TOL:
                        return LPResult(
                            LPStatus.INFEASIBLE, xval[:n],
                            float(c_struct @ xval[:n]) + const, iterations,
                            Basis(basis.copy(), status.copy()))
                    phase = 2
                    y = Binv.T @ c[basis]
                    d = c - self.Afull.T @ y
                    entering = self._choose_entering(d, status, lo, hi, bland)
                if entering is None:
                    point = xval[:n]
                    return LPResult(
                        LPStatus.OPTIMAL, point,
                        float(c_struct @ point) + const, iterations,
                        Basis(basis.copy(), status.copy()))

            q = entering
            if status[q] == AT_UPPER or (status[q] == FREE and d[q] > 0):
                sigma = -1.0
            else:
                sigma = 1.0
            w = Binv @ self.Afull[:, q]
            delta = -sigma * w

            step, block_pos, block_status = self._ratio_test(
                phase, x_b, blo, bhi, below, above, delta, bland, basis)
            own_range = hi[q] - lo[q]
            flip = False
            if np.isfinite(own_range) and own_range < step:
                step, flip = own_range, True

            if np.isinf(step):
                if phase == 2:
                    return LPResult(
                        LPStatus.UNBOUNDED, xval[:n],
                        float(c_struct @ xval[:n]) + const, iterations,
                        Basis(basis.copy(), status.copy()))
                # phase-1 descent is bounded below; an unblocked ray means
                # numerics went bad. Refactor once, else give up.
                fresh = self._factorize(basis)
                if fresh is not None:
                    Binv = fresh
                    pivots_since_refactor = 0
                    iterations += 1
                    continue
                return LPResult(LPStatus.ITERATION_LIMIT, xval[:n],
                                float(c_struct @ xval[:n]) + const, iterations,
                                Basis(basis.copy(), status.copy()))

            if step <= _PIVOT_TOL:
                degenerate += 1
                if degenerate > BLAND_TRIGGER:
                    bland = True

            if flip:
                status[q] = AT_UPPER if status[q] == AT_LOWER else AT_LOWER
            else:
                r = block_pos
                leaving = basis[r]
                status[leaving] = block_status
                basis[r] = q
                status[q] = BASIC
                piv = w[r]
                br = Binv[r] / piv
                Binv -= np.outer(w, br)
                Binv[r] = br
                pivots_since_refactor += 1
            iterations += 1

        xval = self._nonbasic_values(status, lo, hi)
        x_b = Binv @ (b - self.Afull @ xval)
        xval[basis] = x_b
        return LPResult(LPStatus.ITERATION_LIMIT, xval[:n],
                        float(c_struct @ xval[:n]) + const, iterations,
                        Basis(basis.copy(), status.copy()))

    # -- pieces ------------------------------------------------------------

    def _solve_unconstrained(self, lo, hi, c, const):
        point = np.where(c > 0, lo, np.where(c < 0, hi,
                         np.clip(0.0, lo, hi)))
        if np.any(np.isinf(point)):
            finite = np.where(np.isinf(point),
                              np.clip(0.0, np.where(np.isfinite(lo), lo, -1e9),
                                      np.where(np.isfinite(hi), hi, 1e9)),
                              point)
            return LPResult(LPStatus.UNBOUNDED, finite,
                            float(c @ finite) + const, 0, None)
        return LPResult(LPStatus.OPTIMAL, point, float(c @ point) + const, 0,
                        Basis(np.zeros(0, dtype=int), np.zeros(0, dtype=np.int8)))

    def _cold_basis(self, lo, hi):
        n, m = self.n, self.m
        status = np.empty(n + m, dtype=np.int8)
        for j in range(n):
            if np.isfinite(lo[j]):
                status[j] = AT_LOWER
            elif np.isfinite(hi[j]):
                status[j] = AT_UPPER
            else:
                status[j] = FREE
        basis = np.arange(n, n + m)
        status[basis] = BASIC
        return basis, status

    def _initial_basis(self, warm: Basis | None, lo, hi):
        n, m = self.n, self.m
        N = n + m
        if warm is None or warm.basic.shape != (m,) or warm.status.shape != (N,):
            return self._cold_basis(lo, hi)
        basic = warm.basic.astype(int)
        if len(np.unique(basic)) != m or basic.min(initial=0) < 0 \
                or basic.max(initial=-1) >= N:
            return self._cold_basis(lo, hi)
        status = warm.status.astype(np.int8).copy()
        status[:] = np.where(status == BASIC, AT_LOWER, status)
        status[basic] = BASIC
        # Re-anchor nonbasic tags that no longer match the current bounds.
        for j in range(N):
            if status[j] == BASIC:
                continue
            if status[j] == AT_LOWER and not np.isfinite(lo[j]):
                status[j] = AT_UPPER if np.isfinite(hi[j]) else FREE
            elif status[j] == AT_UPPER and not np.isfinite(hi[j]):
                status[j] = AT_LOWER if np.isfinite(lo[j]) else FREE
            elif status[j] == FREE and np.isfinite(lo[j]):
                status[j] = AT_LOWER
            elif status[j] == FREE and np.isfinite(hi[j]):
                status[j] = AT_UPPER
        return basic, status

    def _factorize(self, basis):
        try:
            return np.linalg.inv(self.Afull[:, basis])
        except np.linalg.LinAlgError:
            return None

    def _nonbasic_values(self, status, lo, hi):
        xval = np.zeros(self.n + self.m)
        mask_lo = status == AT_LOWER
        mask_hi = status == AT_UPPER
        xval[mask_lo] = lo[mask_lo]
        xval[mask_hi] = hi[mask_hi]
        return xval

    def _choose_entering(self, d, status, lo, hi, bland):
        width = hi - lo
        movable = width > 1e-12
        elig = ((status == AT_LOWER) & (d < -_DUAL_TOL) |
                (status == AT_UPPER) & (d > _DUAL_TOL) |
                (status == FREE) & (np.abs(d) > _DUAL_TOL)) & movable
        if not elig.any():
            return None
        if bland:
            return int(np.flatnonzero(elig)[0])
        score = np.where(elig, np.abs(d), -1.0)
        return int(np.argmax(score))

    def _ratio_test(self, phase, x_b, blo, bhi, below, above, delta,
                    bland, basis):
        """Smallest blocking step along the entering direction.

        Returns (step, blocking position, status the leaving variable takes).
        Feasible basics block at the bound they approach; in phase 1 an
        out-of-bounds basic blocks where it re-enters its range.
        """
        m = len(x_b)
        best = np.inf
        pos = -1
        pos_status = AT_LOWER
        best_weight = 0.0
        for i in range(m):
            di = delta[i]
            if abs(di) <= _PIVOT_TOL:
                continue
            if phase == 1 and above[i] > 0:
                if di < 0:
                    t = (x_b[i] - bhi[i]) / -di
                    target = AT_UPPER
                else:
                    continue
            elif phase == 1 and below[i] > 0:
                if di > 0:
                    t = (blo[i] - x_b[i]) / di
                    target = AT_LOWER
                else:
                    continue
            elif di > 0:
                if not np.isfinite(bhi[i]):
                    continue
                t = (bhi[i] - x_b[i]) / di
                target = AT_UPPER
            else:
                if not np.isfinite(blo[i]):
                    continue
                t = (x_b[i] - blo[i]) / -di
                target = AT_LOWER
            t = max(t, 0.0)
            if bland:
                # Smallest basic-variable index among ties.
                if t < best - 1e-12 or (t <= best + 1e-12 and
                                        (pos < 0 or basis[i] < basis[pos])):
                    best, pos, pos_status = t, i, target
            else:
                if t < best - 1e-9 or (t <= best + 1e-9 and abs(di) > best_weight):
                    best, pos, pos_status = t, i, target
                    best_weight = abs(di)
        return best, pos, pos_status
