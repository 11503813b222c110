"""Bound-and-row reductions applied once before search.

Passes run to a fixed point (capped at 10) and apply, in order: integral
rounding of integer bounds, fixing of zero-width variables into the
objective constant and row right-hand sides, removal of satisfied empty
rows, conversion of singleton rows into bounds, and detection of trivially
infeasible rows or empty domains. The PresolveRecord maps any feasible
point of the reduced instance back to a feasible point of the original
with the same objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import FEAS_TOL, INF, ProblemInstance, Relation, Row, Solution, evaluate

MAX_PASSES = 10


class ProvenInfeasible(Exception):
    """The instance has no feasible point; carries a short reason."""


@dataclass(frozen=True)
class FixedVariable:
    index: int
    value: float


@dataclass(frozen=True)
class RemovedRow:
    index: int


@dataclass(frozen=True)
class TightenedBound:
    index: int
    side: str          # "lo" or "hi"
    old: float
    new: float


@dataclass
class PresolveRecord:
    original_n: int
    kept_columns: np.ndarray            # reduced index -> original index
    fixed_values: dict[int, float]      # original index -> value
    reductions: list = field(default_factory=list)


def presolve(instance: ProblemInstance) -> tuple[ProblemInstance, PresolveRecord]:
    """Reduce an instance; raises ProvenInfeasible on a trivial certificate."""
    n = instance.num_vars
    lo = instance.lower_bounds.copy()
    hi = instance.upper_bounds.copy()
    cls = instance.var_class.copy()
    c = instance.objective.copy()
    const = instance.objective_constant

    rows = []
    for i, row in enumerate(instance.rows):
        coefs = {j: a for j, a in zip(row.indices, row.coefficients)
                 if abs(a) > 1e-12}
        rows.append([coefs, row.relation, row.rhs, row.name])
    row_alive = np.ones(len(rows), dtype=bool)
    var_alive = np.ones(n, dtype=bool)
    fixed: dict[int, float] = {}
    log: list = []

    def round_integer_bounds(j):
        if cls[j] == 2:  # continuous
            return False
        changed = False
        if np.isfinite(lo[j]):
            r = np.ceil(lo[j] - 1e-9)
            if r > lo[j] + 1e-12:
                log.append(TightenedBound(j, "lo", lo[j], r))
                lo[j] = r
                changed = True
            else:
                lo[j] = r
        if np.isfinite(hi[j]):
            r = np.floor(hi[j] + 1e-9)
            if r < hi[j] - 1e-12:
                log.append(TightenedBound(j, "hi", hi[j], r))
                hi[j] = r
                changed = True
            else:
                hi[j] = r
        return changed

    def fix_variable(j, value):
        fixed[j] = value
        var_alive[j] = False
        log.append(FixedVariable(j, value))
        nonlocal const
        const += c[j] * value
        for i in np.flatnonzero(row_alive):
            coefs = rows[i][0]
            if j in coefs:
                rows[i][2] -= coefs.pop(j) * value

    for _ in range(MAX_PASSES):
        changed = False

        for j in np.flatnonzero(var_alive):
            if round_integer_bounds(j):
                changed = True
            if lo[j] > hi[j] + 1e-9:
                raise ProvenInfeasible(
                    f"variable {instance.var_names[j]} has empty domain "
                    f"[{lo[j]}, {hi[j]}]")
            if hi[j] - lo[j] < 1e-12:
                fix_variable(j, lo[j])
                changed = True

        for i in np.flatnonzero(row_alive):
            coefs, rel, b, rname = rows[i]
            if not coefs:
                if (rel == Relation.LE and 0 > b + FEAS_TOL) or \
                   (rel == Relation.GE and 0 < b - FEAS_TOL) or \
                   (rel == Relation.EQ and abs(b) > FEAS_TOL):
                    raise ProvenInfeasible(f"row {rname} reduces to 0 {rel.value} {b}")
                row_alive[i] = False
                log.append(RemovedRow(i))
                changed = True
                continue
            if len(coefs) == 1:
                (j, a), = coefs.items()
                bound = b / a
                if rel == Relation.EQ:
                    new_lo, new_hi = bound, bound
                elif (rel == Relation.LE) == (a > 0):
                    new_lo, new_hi = -INF, bound
                else:
                    new_lo, new_hi = bound, INF
                if new_lo > lo[j] + 1e-12:
                    log.append(TightenedBound(j, "lo", lo[j], new_lo))
                    lo[j] = new_lo
                if new_hi < hi[j] - 1e-12:
                    log.append(TightenedBound(j, "hi", hi[j], new_hi))
                    hi[j] = new_hi
                row_alive[i] = False
                log.append(RemovedRow(i))
                changed = True
                if lo[j] > hi[j] + 1e-9:
                    raise ProvenInfeasible(
                        f"row {rname} empties the domain of {instance.var_names[j]}")

        if not changed:
            break

    kept = np.flatnonzero(var_alive)
    remap = {int(j): r for r, j in enumerate(kept)}
    new_rows = []
    for i in np.flatnonzero(row_alive):
        coefs, rel, b, rname = rows[i]
        idx = tuple(sorted(remap[j] for j in coefs))
        new_rows.append(Row(idx,
                            tuple(coefs[int(kept[r])] for r in idx),
                            rel, b, rname))

    reduced = ProblemInstance(
        name=instance.name,
        objective=c[kept],
        rows=new_rows,
        lower_bounds=lo[kept],
        upper_bounds=hi[kept],
        var_class=cls[kept],
        var_names=[instance.var_names[int(j)] for j in kept],
        objective_constant=const,
    )
    record = PresolveRecord(original_n=n, kept_columns=kept,
                            fixed_values=fixed, reductions=log)
    return reduced, record


def uncrush(reduced_solution: Solution, record: PresolveRecord,
            original: ProblemInstance) -> Solution:
    """Map a reduced-space solution back to the original variable space."""
    full = np.empty(record.original_n)
    full[record.kept_columns] = reduced_solution.values
    for j, v in record.fixed_values.items():
        full[j] = v
    return evaluate(original, full)


def crush(values_original, record: PresolveRecord) -> np.ndarray:
    """Project an original-space point onto the reduced variable space."""
    v = np.asarray(values_original, dtype=float)
    if v.shape != (record.original_n,):
        raise ValueError("value vector has the wrong length")
    return v[record.kept_columns].copy()
