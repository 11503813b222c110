"""Shared test utilities: random instance generation and brute-force oracles.

The generator produces small pure-integer problems whose feasibility is
guaranteed by construction: right-hand sides are derived from a sampled
anchor point. The oracle enumerates the whole integer box, so expected
optima are computed independently of the solver under test.
"""

from __future__ import annotations

import numpy as np

from poutine import (ProblemInstance, Relation, VarClass, evaluate, make_row)

MAX_ENUM_POINTS = 60000


def random_milp(rng: np.random.Generator, max_vars: int = 12,
                max_rows: int = 8, binary_only: bool = False,
                slack: int = 5) -> ProblemInstance:
    """Random pure-integer instance, feasible by construction.

    An anchor point is sampled first; each row's right-hand side is set so
    the anchor satisfies it (with up to `slack` units of room on
    inequalities). Bound boxes are shrunk until full enumeration stays
    below MAX_ENUM_POINTS.
    """
    n = int(rng.integers(2, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    if binary_only:
        lo = np.zeros(n)
        hi = np.ones(n)
        classes = np.full(n, VarClass.BINARY)
    else:
        lo = rng.integers(-3, 1, n).astype(float)
        width = rng.integers(1, 5, n).astype(float)
        # keep the box small enough to enumerate
        while np.prod(width + 1) > MAX_ENUM_POINTS:
            j = int(np.argmax(width))
            width[j] -= 1
        hi = lo + width
        classes = np.full(n, VarClass.GENERAL_INTEGER)
        classes[(lo == 0) & (hi == 1)] = VarClass.BINARY

    anchor = rng.integers(lo.astype(int), hi.astype(int) + 1).astype(float)
    cost = rng.integers(-10, 11, n).astype(float)
    rows = []
    rels = [Relation.LE, Relation.GE, Relation.EQ]
    for i in range(m):
        coefs = rng.integers(-10, 11, n).astype(float)
        keep = rng.random(n) < 0.7
        if not keep.any():
            keep[int(rng.integers(0, n))] = True
        coefs[~keep] = 0.0
        idx = np.flatnonzero(coefs)
        if idx.size == 0:
            idx = np.array([int(rng.integers(0, n))])
            coefs[idx] = 1.0
        act = float(coefs @ anchor)
        rel = rels[int(rng.integers(0, 3))]
        if rel == Relation.LE:
            rhs = act + float(rng.integers(0, slack + 1))
        elif rel == Relation.GE:
            rhs = act - float(rng.integers(0, slack + 1))
        else:
            rhs = act
        rows.append(make_row(idx.tolist(), coefs[idx].tolist(), rel, rhs,
                             f"r{i}"))
    return ProblemInstance(f"rand{rng.integers(0, 10**9)}", cost, rows,
                           lo, hi, classes,
                           objective_constant=float(rng.integers(-5, 6)))


def make_infeasible(instance: ProblemInstance) -> ProblemInstance:
    """Copy of `instance` with one contradictory row pair appended."""
    n = instance.num_vars
    coefs = np.ones(n)
    lo_act = float(coefs @ np.where(coefs > 0, instance.lower_bounds,
                                    instance.upper_bounds))
    rows = list(instance.rows)
    rows.append(make_row(list(range(n)), coefs.tolist(), Relation.LE,
                         lo_act - 1.0, "impossible"))
    return ProblemInstance(instance.name + "_inf", instance.objective, rows,
                           instance.lower_bounds, instance.upper_bounds,
                           instance.var_class,
                           objective_constant=instance.objective_constant)


def all_points(instance: ProblemInstance) -> np.ndarray:
    """Every integer point in the bound box, as a (count, n) array."""
    grids = [np.arange(int(lo), int(hi) + 1)
             for lo, hi in zip(instance.lower_bounds, instance.upper_bounds)]
    total = 1
    for g in grids:
        total *= g.size
    if total > MAX_ENUM_POINTS * 20:
        raise ValueError(f"box too large to enumerate ({total} points)")
    mesh = np.meshgrid(*grids, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1).astype(float)


def feasible_mask(instance: ProblemInstance, points: np.ndarray,
                  tol: float = 1e-6) -> np.ndarray:
    acts = points @ instance.matrix.T
    ok = np.ones(points.shape[0], dtype=bool)
    for i, row in enumerate(instance.rows):
        if row.relation == Relation.LE:
            ok &= acts[:, i] <= row.rhs + tol
        elif row.relation == Relation.GE:
            ok &= acts[:, i] >= row.rhs - tol
        else:
            ok &= np.abs(acts[:, i] - row.rhs) <= tol
    return ok


def enumerate_optimum(instance: ProblemInstance):
    """Brute-force optimum over the integer box.

    Returns (objective, point) or (None, None) when no feasible point
    exists. Only valid for pure-integer instances with finite bounds.
    """
    assert np.all(instance.integer_mask), "oracle needs a pure-integer model"
    points = all_points(instance)
    ok = feasible_mask(instance, points)
    if not ok.any():
        return None, None
    values = points[ok] @ instance.objective + instance.objective_constant
    best = int(np.argmin(values))
    return float(values[best]), points[ok][best]


def assert_sound(instance: ProblemInstance, solution, tol: float = 1e-6):
    """A claimed solution must re-evaluate clean: feasible, exact objective."""
    assert solution.max_violation <= tol, \
        f"claimed solution violates by {solution.max_violation}"
    check = evaluate(instance, solution.values)
    scale = max(1.0, abs(check.objective))
    assert abs(check.objective - solution.objective) <= 1e-9 * scale, \
        f"objective mismatch {solution.objective} vs {check.objective}"
