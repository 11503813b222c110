"""Problem data model shared by every solver component.

An instance is a minimization MILP over variables with bounds and a class
(binary / general integer / continuous), plus a list of sparse linear rows.
Candidate points are judged by `evaluate`, which is the single source of
truth for objective values and feasibility throughout the code base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

INF = float("inf")

# Shared tolerances. FEAS_TOL covers rows, bounds and integrality alike.
FEAS_TOL = 1e-6
OBJ_REL_TOL = 1e-9


class Relation(Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class VarClass(IntEnum):
    BINARY = 0
    GENERAL_INTEGER = 1
    CONTINUOUS = 2


@dataclass(frozen=True)
class Row:
    """One linear constraint: sum(coefficients * x[indices]) <relation> rhs."""

    indices: tuple[int, ...]
    coefficients: tuple[float, ...]
    relation: Relation
    rhs: float
    name: str = ""


def make_row(indices, coefficients, relation, rhs, name="") -> Row:
    return Row(tuple(int(i) for i in indices),
               tuple(float(c) for c in coefficients),
               relation, float(rhs), name)


@dataclass
class ProblemInstance:
    """Immutable-by-convention MILP in minimize form.

    Fractional bounds on integer variables are tightened at construction
    (lower rounded up, upper rounded down). Bounds may be crossed
    (lower > upper); that encodes an empty domain and is reported by
    presolve or the LP, not here.
    """

    name: str
    objective: np.ndarray
    rows: list[Row]
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray
    var_class: np.ndarray
    var_names: list[str] | None = None
    objective_constant: float = 0.0

    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    _row_rel: np.ndarray | None = field(default=None, repr=False, compare=False)
    _row_rhs: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.objective = np.array(self.objective, dtype=float)
        self.lower_bounds = np.array(self.lower_bounds, dtype=float)
        self.upper_bounds = np.array(self.upper_bounds, dtype=float)
        self.var_class = np.array([int(v) for v in np.asarray(self.var_class)],
                                  dtype=np.int8)
        n = self.objective.shape[0]
        if self.lower_bounds.shape != (n,) or self.upper_bounds.shape != (n,) \
                or self.var_class.shape != (n,):
            raise ValueError("inconsistent vector lengths in instance")
        if self.var_names is None:
            self.var_names = [f"x{j}" for j in range(n)]
        if len(self.var_names) != n:
            raise ValueError("var_names length mismatch")

        int_mask = self.var_class != VarClass.CONTINUOUS
        if int_mask.any():
            lo = self.lower_bounds[int_mask]
            hi = self.upper_bounds[int_mask]
            self.lower_bounds[int_mask] = np.where(
                np.isfinite(lo), np.ceil(lo - 1e-9), lo)
            self.upper_bounds[int_mask] = np.where(
                np.isfinite(hi), np.floor(hi + 1e-9), hi)

        bin_mask = self.var_class == VarClass.BINARY
        if bin_mask.any():
            if (self.lower_bounds[bin_mask] < -1e-9).any() \
                    or (self.upper_bounds[bin_mask] > 1 + 1e-9).any():
                raise ValueError("binary variable with bounds outside [0, 1]")

        for row in self.rows:
            if len(row.indices) != len(row.coefficients):
                raise ValueError(f"row {row.name!r}: index/coefficient length mismatch")
            if len(set(row.indices)) != len(row.indices):
                raise ValueError(f"row {row.name!r}: duplicate column index")
            if any(j < 0 or j >= n for j in row.indices):
                raise ValueError(f"row {row.name!r}: column index out of range")

    # -- size and index helpers -------------------------------------------

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def integer_mask(self) -> np.ndarray:
        return self.var_class != VarClass.CONTINUOUS

    @property
    def binary_mask(self) -> np.ndarray:
        return self.var_class == VarClass.BINARY

    def integer_indices(self) -> np.ndarray:
        return np.flatnonzero(self.integer_mask)

    def binary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.binary_mask)

    def general_integer_indices(self) -> np.ndarray:
        return np.flatnonzero(self.var_class == VarClass.GENERAL_INTEGER)

    # -- cached dense views (instances are small; dense is fine) ----------

    def _build_cache(self):
        m, n = self.num_rows, self.num_vars
        mat = np.zeros((m, n))
        rel = np.zeros(m, dtype=np.int8)
        rhs = np.zeros(m)
        rel_code = {Relation.LE: 0, Relation.EQ: 1, Relation.GE: 2}
        for i, row in enumerate(self.rows):
            if row.indices:
                mat[i, list(row.indices)] = row.coefficients
            rel[i] = rel_code[row.relation]
            rhs[i] = row.rhs
        self._matrix, self._row_rel, self._row_rhs = mat, rel, rhs

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None or self._matrix.shape != (self.num_rows, self.num_vars):
            self._build_cache()
        return self._matrix

    @property
    def row_relations(self) -> np.ndarray:
        self.matrix
        return self._row_rel

    @property
    def row_rhs(self) -> np.ndarray:
        self.matrix
        return self._row_rhs


@dataclass
class Solution:
    """A candidate point with its recomputed objective and worst violation."""

    values: np.ndarray
    objective: float
    max_violation: float

    @property
    def is_feasible(self) -> bool:
        return self.max_violation <= FEAS_TOL


def evaluate(instance: ProblemInstance, values) -> Solution:
    """Score a candidate point against an instance.

    The objective is recomputed from scratch (c . x + constant) and
    max_violation is the worst of: row violation, bound violation and
    distance of an integer-class entry to its nearest integer.
    """
    v = np.asarray(values, dtype=float)
    if v.shape != (instance.num_vars,):
        raise ValueError(
            f"expected {instance.num_vars} values, got shape {v.shape}")
    obj = float(instance.objective @ v) + instance.objective_constant

    worst = 0.0
    if instance.num_rows:
        act = instance.matrix @ v
        rel = instance.row_relations
        rhs = instance.row_rhs
        over = act - rhs
        under = rhs - act
        viol = np.where(rel == 0, over,
                        np.where(rel == 2, under, np.abs(over)))
        worst = max(worst, float(np.max(viol)))

    lo_viol = np.maximum(0.0, instance.lower_bounds - v)
    hi_viol = np.maximum(0.0, v - instance.upper_bounds)
    if v.size:
        worst = max(worst, float(np.max(lo_viol)), float(np.max(hi_viol)))

    imask = instance.integer_mask
    if imask.any():
        gaps = np.abs(v[imask] - np.rint(v[imask]))
        worst = max(worst, float(np.max(gaps)))

    return Solution(values=v.copy(), objective=obj, max_violation=max(worst, 0.0))


def is_integral(values, var_class, tol: float = FEAS_TOL) -> bool:
    """True when every integer-class entry is within tol of an integer."""
    v = np.asarray(values, dtype=float)
    mask = np.asarray(var_class) != VarClass.CONTINUOUS
    if not mask.any():
        return True
    return bool(np.all(np.abs(v[mask] - np.rint(v[mask])) <= tol))


def _format_value(value: float, integral: bool) -> str:
    if integral:
        return str(int(round(value)))
    f = float(value)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def write_sol(solution: Solution, instance: ProblemInstance) -> str:
    """Render a solution in the plain `.sol` exchange format.

    First line is `=obj= <objective>`, then one `<name> <value>` line per
    variable. Integer-class variables are printed as integers.
    """
    lines = [f"=obj= {_format_value(solution.objective, False)}"]
    for j, name in enumerate(instance.var_names):
        integral = instance.var_class[j] != VarClass.CONTINUOUS
        lines.append(f"{name} {_format_value(solution.values[j], integral)}")
    return "\n".join(lines) + "\n"


def read_sol(text: str, instance: ProblemInstance) -> tuple[np.ndarray, float | None]:
    """Parse a `.sol` file back into a value vector (missing names default 0).

    Returns (values, stated_objective). Unknown variable names are an error.
    """
    index = {name: j for j, name in enumerate(instance.var_names)}
    values = np.zeros(instance.num_vars)
    stated = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "=obj=":
            stated = float(parts[1])
            continue
        if len(parts) < 2:
            raise ValueError(f"malformed .sol line: {raw!r}")
        if parts[0] not in index:
            raise ValueError(f"unknown variable in .sol: {parts[0]!r}")
        values[index[parts[0]]] = float(parts[1])
    return values, stated
