"""Feasibility pump with a convexified objective.

Each iteration solves the relaxation under a blend of (1 - alpha) times
the linearized integer distance to the last rounded point and alpha times
the original cost, scaled by sqrt(#integers) / ||c||  (denominator 1 when
c is the zero vector). Binary distance terms are linearized through the
Hamming expansion; each general integer gets one auxiliary column d with
d >= +-(x - x_tilde). Rounding is half-up; a rounded point repeating any
of the last `perturb_period` rounded points triggers a randomized kick.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .model import (FEAS_TOL, INF, ProblemInstance, Relation, Row, Solution,
                    VarClass, evaluate, is_integral)
from .simplex import LPStatus, SimplexWorkspace


@dataclass(frozen=True)
class FPConfig:
    alpha: float = 0.4
    max_iterations: int = 10
    perturb_period: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.max_iterations < 1 or self.perturb_period < 1:
            raise ValueError("iteration and perturbation counts must be >= 1")


@dataclass
class FPOutcome:
    solution: Solution | None
    x_tilde: np.ndarray | None      # last rounded point (full length)
    lp_point: np.ndarray | None     # last LP point over the original vars
    iterations: int
    trace: list = field(default_factory=list)   # (key, distance, blended obj)


def round_point(point, var_class) -> np.ndarray:
    """Round integer-class entries half-up (-0.5 -> 0); others untouched."""
    v = np.asarray(point, dtype=float).copy()
    mask = np.asarray(var_class) != VarClass.CONTINUOUS
    v[mask] = np.floor(v[mask] + 0.5)
    return v


def fp_objective(x_tilde, alpha: float, instance: ProblemInstance
                 ) -> tuple[np.ndarray, float]:
    """Blended distance objective as (coefficients, constant).

    The vector covers the n structural variables followed by one distance
    auxiliary per general integer (in index order). Raises ValueError when
    x_tilde is not integral on the integer variables.
    """
    n = instance.num_vars
    xt = np.asarray(x_tilde, dtype=float)
    if xt.shape != (n,):
        raise ValueError("x_tilde has the wrong length")
    imask = instance.integer_mask
    if imask.any() and np.max(np.abs(xt[imask] - np.rint(xt[imask]))) > FEAS_TOL:
        raise ValueError("x_tilde must be integral on the integer variables")

    gen = instance.general_integer_indices()
    coeffs = np.zeros(n + gen.size)
    constant = 0.0
    w = 1.0 - alpha

    for j in instance.binary_indices():
        if int(round(xt[j])) == 0:
            coeffs[j] += w
        else:
            coeffs[j] -= w
            constant += w
    coeffs[n:] = w

    c = instance.objective
    norm = float(np.linalg.norm(c))
    denom = norm if norm > 0.0 else 1.0
    n_int = int(np.count_nonzero(imask))
    coeffs[:n] += alpha * (np.sqrt(n_int) / denom) * c
    return coeffs, constant


def perturb(x_tilde, last_lp_point, rng: np.random.Generator,
            instance: ProblemInstance) -> np.ndarray:
    """Randomized kick out of a rounding cycle.

    Flips the T binaries most fractional in the LP point, T uniform in
    [max(1, n_int//10), max(1, n_int//2)]; shifts each general integer one
    step toward the LP value with probability 2 * fractionality. At least
    one entry always changes.
    """
    out = np.asarray(x_tilde, dtype=float).copy()
    lp = np.asarray(last_lp_point, dtype=float)
    bin_idx = instance.binary_indices()
    gen_idx = instance.general_integer_indices()
    n_int = bin_idx.size + gen_idx.size
    if n_int == 0:
        return out
    frac = np.abs(lp - np.rint(lp))

    if bin_idx.size:
        low = max(1, n_int // 10)
        high = max(1, n_int // 2)
        t = int(rng.integers(low, high + 1))
        t = min(t, bin_idx.size)
        order = bin_idx[np.argsort(-frac[bin_idx], kind="stable")]
        for j in order[:t]:
            out[j] = 1.0 - out[j]

    for j in gen_idx:
        p = min(1.0, 2.0 * frac[j])
        if p > 0.0 and rng.random() < p:
            step = 1.0 if lp[j] > out[j] else -1.0
            moved = out[j] + step
            if instance.lower_bounds[j] <= moved <= instance.upper_bounds[j]:
                out[j] = moved

    if np.array_equal(out, np.asarray(x_tilde, dtype=float)):
        pool = np.concatenate([bin_idx, gen_idx])
        for j in rng.permutation(pool):
            if j in bin_idx:
                out[j] = 1.0 - out[j]
                break
            lo, hi = instance.lower_bounds[j], instance.upper_bounds[j]
            if hi - lo >= 1.0:
                if lp[j] > out[j] and out[j] + 1 <= hi:
                    out[j] += 1.0
                elif out[j] - 1 >= lo:
                    out[j] -= 1.0
                else:
                    out[j] += 1.0
                break
    return out


class _PumpRelaxation:
    """Augmented LP reused across iterations; only rhs and cost change."""

    def __init__(self, instance: ProblemInstance):
        self.instance = instance
        self.gen = instance.general_integer_indices()
        n = instance.num_vars
        g = self.gen.size
        if g == 0:
            self.aug = instance
        else:
            rows = list(instance.rows)
            for p, j in enumerate(self.gen):
                d = n + p
                rows.append(Row((int(j), d), (1.0, -1.0), Relation.LE, 0.0,
                                f"fp_dist_hi_{p}"))
                rows.append(Row((int(j), d), (-1.0, -1.0), Relation.LE, 0.0,
                                f"fp_dist_lo_{p}"))
            self.aug = ProblemInstance(
                name=instance.name,
                objective=np.concatenate([instance.objective, np.zeros(g)]),
                rows=rows,
                lower_bounds=np.concatenate([instance.lower_bounds, np.zeros(g)]),
                upper_bounds=np.concatenate([instance.upper_bounds,
                                             np.full(g, INF)]),
                var_class=np.concatenate([instance.var_class,
                                          np.full(g, VarClass.CONTINUOUS,
                                                  dtype=np.int8)]),
                var_names=list(instance.var_names)
                + [f"_fp_d{p}" for p in range(g)],
            )
        self.ws = SimplexWorkspace(self.aug)

    def rhs_for(self, x_tilde) -> np.ndarray:
        base = self.instance.row_rhs
        if self.gen.size == 0:
            return base
        link = np.empty(2 * self.gen.size)
        link[0::2] = x_tilde[self.gen]
        link[1::2] = -x_tilde[self.gen]
        return np.concatenate([base, link])


def run_fp(instance: ProblemInstance, config: FPConfig,
           deadline: float | None = None, stop=None) -> FPOutcome:
    """Pump until integer feasible, the iteration budget, or the deadline."""
    rng = np.random.default_rng(config.seed)
    cls = instance.var_class
    int_idx = instance.integer_indices()

    def out_of_budget():
        if stop is not None and stop():
            return True
        return deadline is not None and time.monotonic() >= deadline

    ws0 = SimplexWorkspace(instance)
    res = ws0.solve()
    if res.status != LPStatus.OPTIMAL:
        return FPOutcome(None, None, None, 0)
    if is_integral(res.point, cls):
        sol = evaluate(instance, res.point)
        if sol.is_feasible:
            return FPOutcome(sol, res.point.copy(), res.point.copy(), 0)

    x_tilde = round_point(res.point, cls)
    candidate = res.point.copy()
    candidate[int_idx] = x_tilde[int_idx]
    sol = evaluate(instance, candidate)
    if sol.is_feasible:
        return FPOutcome(sol, x_tilde, res.point.copy(), 0)

    pump = _PumpRelaxation(instance)
    n = instance.num_vars
    history: deque = deque(maxlen=config.perturb_period)
    history.append(tuple(np.rint(x_tilde[int_idx]).astype(int)))
    trace = []
    basis = None
    lp_point = res.point.copy()
    iterations = 0

    for iterations in range(1, config.max_iterations + 1):
        if out_of_budget():
            break
        coeffs, constant = fp_objective(x_tilde, config.alpha, instance)
        res = pump.ws.solve(objective_override=(coeffs, constant),
                            rhs_override=pump.rhs_for(x_tilde),
                            warm_basis=basis)
        if res.status != LPStatus.OPTIMAL:
            break
        basis = res.basis
        lp_point = res.point[:n].copy()
        key = tuple(np.rint(x_tilde[int_idx]).astype(int))
        distance = float(np.sum(np.abs(lp_point[int_idx] - x_tilde[int_idx])))
        trace.append((key, distance, res.objective))

        if is_integral(lp_point, cls):
            sol = evaluate(instance, lp_point)
            if sol.is_feasible:
                return FPOutcome(sol, x_tilde, lp_point, iterations, trace)
        rounded = round_point(lp_point, cls)
        candidate = lp_point.copy()
        candidate[int_idx] = rounded[int_idx]
        sol = evaluate(instance, candidate)
        if sol.is_feasible:
            return FPOutcome(sol, rounded, lp_point, iterations, trace)

        new_key = tuple(np.rint(rounded[int_idx]).astype(int))
        if new_key in history:
            rounded = perturb(rounded, lp_point, rng, instance)
            new_key = tuple(np.rint(rounded[int_idx]).astype(int))
        x_tilde = rounded
        history.append(new_key)

    return FPOutcome(None, x_tilde, lp_point, iterations, trace)
