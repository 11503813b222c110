"""MPS reader producing a minimize-form ProblemInstance.

Handles fixed and free format by whitespace tokenization (names containing
spaces are not supported), transparent gzip for `*.gz` paths, and the
sections NAME, OBJSENSE, ROWS, COLUMNS (with INTORG/INTEND markers), RHS,
RANGES, BOUNDS, ENDATA. Unsupported structure (SOS, quadratic sections,
semicontinuous bounds) is rejected with a clear error.

Conventions applied:
  * the first N row is the objective; a second one is an error
  * RHS on the objective row is the negated objective constant
  * MAXIMIZE objectives are negated into minimize form
  * marker integers without BOUNDS entries become binaries on [0, 1];
    with explicit bounds the default upper is +inf, and the class is
    Binary only if the final bounds are exactly [0, 1]
  * an UP bound < 0 on a continuous column whose lower bound was never
    set drops the lower bound to -inf (classic reader behaviour)
  * RANGES make a row two-sided: L spans [b-|r|, b], G spans [b, b+|r|],
    E spans [b, b+r] for r >= 0 and [b+r, b] for r < 0; the companion
    inequality is appended as an extra row
  * duplicate (column, row) entries are summed
"""

from __future__ import annotations

import gzip
from pathlib import Path

import numpy as np

from .model import INF, ProblemInstance, Relation, Row, VarClass


class MpsParseError(ValueError):
    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


_ROW_TYPES = {"N", "L", "G", "E"}
_SECTION_ORDER = ["NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES",
                  "BOUNDS", "ENDATA"]
_REJECTED_SECTIONS = {"SOS", "QMATRIX", "QUADOBJ", "QCMATRIX", "QSECTION",
                      "CSECTION", "INDICATORS"}


def read_instance(path) -> ProblemInstance:
    """Load an instance from a `.mps` or `.mps.gz` file."""
    p = Path(path)
    if p.suffix == ".gz":
        with gzip.open(p, "rt") as fh:
            text = fh.read()
    else:
        text = p.read_text()
    name_hint = p.name
    for ext in (".gz", ".mps", ".MPS"):
        if name_hint.endswith(ext):
            name_hint = name_hint[: -len(ext)]
    return parse_mps(text, default_name=name_hint)


def parse_mps(text, default_name: str = "instance") -> ProblemInstance:
    """Parse MPS text (str or bytes) into a minimize-form instance."""
    if isinstance(text, bytes):
        text = text.decode()
    state = _Parser(default_name)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        is_header = not raw[0].isspace()
        tokens = raw.split()
        if is_header:
            state.enter_section(tokens, lineno)
        else:
            state.data_line(tokens, lineno)
    return state.finish()


class _Parser:
    def __init__(self, default_name: str):
        self.name = default_name
        self.section = None
        self.seen = set()
        self.maximize = False
        self.obj_row = None
        self.obj_rhs = 0.0
        self.row_order: list[str] = []
        self.row_type: dict[str, str] = {}
        self.col_index: dict[str, int] = {}
        self.col_names: list[str] = []
        self.col_integer: list[bool] = []
        self.entries: list[dict[str, float]] = []   # per column: row -> coef
        self.obj_entries: list[float] = []
        self.rhs: dict[str, float] = {}
        self.ranges: dict[str, float] = {}
        self.bounds: list[tuple[str, str, float | None, int]] = []
        self.in_integer_block = False
        self.ended = False

    def enter_section(self, tokens, lineno):
        head = tokens[0].upper()
        if head in _REJECTED_SECTIONS:
            raise MpsParseError(f"unsupported section {head}", lineno)
        if head not in _SECTION_ORDER:
            raise MpsParseError(f"unknown section {tokens[0]!r}", lineno)
        if head in self.seen:
            raise MpsParseError(f"repeated section {head}", lineno)
        prev_rank = max((_SECTION_ORDER.index(s) for s in self.seen), default=-1)
        if _SECTION_ORDER.index(head) < prev_rank:
            raise MpsParseError(f"section {head} out of order", lineno)
        if head in ("COLUMNS", "RHS", "RANGES", "BOUNDS") and "ROWS" not in self.seen:
            raise MpsParseError(f"section {head} before ROWS", lineno)
        self.seen.add(head)
        self.section = head
        if head == "NAME" and len(tokens) > 1:
            self.name = tokens[1]
        if head == "OBJSENSE" and len(tokens) > 1:
            self._objsense(tokens[1], lineno)
        if head == "ENDATA":
            self.ended = True

    def _objsense(self, word, lineno):
        w = word.upper()
        if w in ("MAX", "MAXIMIZE"):
            self.maximize = True
        elif w in ("MIN", "MINIMIZE"):
            self.maximize = False
        else:
            raise MpsParseError(f"bad OBJSENSE value {word!r}", lineno)

    def data_line(self, tokens, lineno):
        if self.section is None:
            raise MpsParseError("data before any section header", lineno)
        handler = {
            "OBJSENSE": self._objsense_line,
            "ROWS": self._rows_line,
            "COLUMNS": self._columns_line,
            "RHS": self._rhs_line,
            "RANGES": self._ranges_line,
            "BOUNDS": self._bounds_line,
        }.get(self.section)
        if handler is None:
            raise MpsParseError(f"unexpected data in section {self.section}", lineno)
        handler(tokens, lineno)

    def _objsense_line(self, tokens, lineno):
        self._objsense(tokens[0], lineno)

    def _rows_line(self, tokens, lineno):
        if len(tokens) != 2:
            raise MpsParseError("ROWS line needs a type and a name", lineno)
        rtype, rname = tokens[0].upper(), tokens[1]
        if rtype not in _ROW_TYPES:
            raise MpsParseError(f"unknown row type {tokens[0]!r}", lineno)
        if rtype == "N":
            if self.obj_row is not None:
                raise MpsParseError("duplicate objective row", lineno)
            self.obj_row = rname
            return
        if rname in self.row_type or rname == self.obj_row:
            raise MpsParseError(f"duplicate row name {rname!r}", lineno)
        self.row_type[rname] = rtype
        self.row_order.append(rname)

    def _column(self, name) -> int:
        j = self.col_index.get(name)
        if j is None:
            j = len(self.col_names)
            self.col_index[name] = j
            self.col_names.append(name)
            self.col_integer.append(self.in_integer_block)
            self.entries.append({})
            self.obj_entries.append(0.0)
        return j

    def _columns_line(self, tokens, lineno):
        if "'MARKER'" in tokens:
            if "'INTORG'" in tokens:
                self.in_integer_block = True
            elif "'INTEND'" in tokens:
                self.in_integer_block = False
            else:
                raise MpsParseError("marker line without INTORG/INTEND", lineno)
            return
        if len(tokens) not in (3, 5):
            raise MpsParseError("COLUMNS line needs 1 or 2 (row, value) pairs", lineno)
        j = self._column(tokens[0])
        for k in range(1, len(tokens), 2):
            rname, value = tokens[k], _num(tokens[k + 1], lineno)
            if rname == self.obj_row:
                self.obj_entries[j] += value
            elif rname in self.row_type:
                self.entries[j][rname] = self.entries[j].get(rname, 0.0) + value
            else:
                raise MpsParseError(f"unknown row reference {rname!r}", lineno)

    def _pairs(self, tokens, lineno, section):
        # Set name is optional in free format: odd token count means present.
        body = tokens[1:] if len(tokens) % 2 == 1 else tokens
        if not body or len(body) % 2:
            raise MpsParseError(f"malformed {section} line", lineno)
        return [(body[k], _num(body[k + 1], lineno)) for k in range(0, len(body), 2)]

    def _rhs_line(self, tokens, lineno):
        for rname, value in self._pairs(tokens, lineno, "RHS"):
            if rname == self.obj_row:
                self.obj_rhs = value
            elif rname in self.row_type:
                self.rhs[rname] = value
            else:
                raise MpsParseError(f"unknown row reference {rname!r}", lineno)

    def _ranges_line(self, tokens, lineno):
        for rname, value in self._pairs(tokens, lineno, "RANGES"):
            if rname not in self.row_type:
                raise MpsParseError(f"RANGES on unknown row {rname!r}", lineno)
            self.ranges[rname] = value

    def _bounds_line(self, tokens, lineno):
        btype = tokens[0].upper()
        no_value = btype in ("FR", "MI", "PL", "BV")
        if btype in ("SC",):
            raise MpsParseError("semicontinuous bounds are not supported", lineno)
        if btype not in ("LO", "UP", "FX", "FR", "MI", "PL", "BV", "LI", "UI"):
            raise MpsParseError(f"unknown bound type {tokens[0]!r}", lineno)
        if no_value:
            if len(tokens) == 2:
                var = tokens[1]
            elif len(tokens) == 3:
                var = tokens[2]
            else:
                raise MpsParseError("malformed BOUNDS line", lineno)
            value = None
        else:
            if len(tokens) == 3:
                var, value = tokens[1], _num(tokens[2], lineno)
            elif len(tokens) == 4:
                var, value = tokens[2], _num(tokens[3], lineno)
            else:
                raise MpsParseError("malformed BOUNDS line", lineno)
        if var not in self.col_index:
            raise MpsParseError(f"BOUNDS on unknown column {var!r}", lineno)
        self.bounds.append((btype, var, value, lineno))

    def finish(self) -> ProblemInstance:
        if "ROWS" not in self.seen or "COLUMNS" not in self.seen:
            raise MpsParseError("missing ROWS or COLUMNS section")
        if not self.ended:
            raise MpsParseError("missing ENDATA")
        if self.obj_row is None:
            raise MpsParseError("no objective (N) row declared")

        n = len(self.col_names)
        lower = np.zeros(n)
        upper = np.full(n, INF)
        integer = list(self.col_integer)
        has_bound_entry = [False] * n
        explicit_lower = [False] * n

        # Marker integers keep the [0,1] default only when no BOUNDS entry
        # touches them at all.
        touched = {self.col_index[v] for _, v, _, _ in self.bounds}
        for btype, var, value, lineno in self.bounds:
            j = self.col_index[var]
            has_bound_entry[j] = True
            if btype == "LO":
                lower[j] = value
                explicit_lower[j] = True
            elif btype == "UP":
                if value < 0 and not explicit_lower[j] and not integer[j]:
                    lower[j] = -INF
                upper[j] = value
            elif btype == "FX":
                lower[j] = upper[j] = value
                explicit_lower[j] = True
            elif btype == "FR":
                lower[j], upper[j] = -INF, INF
                explicit_lower[j] = True
            elif btype == "MI":
                lower[j] = -INF
                explicit_lower[j] = True
            elif btype == "PL":
                upper[j] = INF
            elif btype == "BV":
                integer[j] = True
                lower[j], upper[j] = 0.0, 1.0
                explicit_lower[j] = True
            elif btype == "LI":
                integer[j] = True
                lower[j] = value
                explicit_lower[j] = True
            elif btype == "UI":
                integer[j] = True
                upper[j] = value

        classes = np.full(n, VarClass.CONTINUOUS, dtype=np.int8)
        for j in range(n):
            if not integer[j]:
                continue
            if self.col_integer[j] and j not in touched:
                lower[j], upper[j] = 0.0, 1.0
                classes[j] = VarClass.BINARY
            elif lower[j] == 0.0 and upper[j] == 1.0:
                classes[j] = VarClass.BINARY
            else:
                classes[j] = VarClass.GENERAL_INTEGER

        rel_map = {"L": Relation.LE, "G": Relation.GE, "E": Relation.EQ}
        by_row: dict[str, list[tuple[int, float]]] = {r: [] for r in self.row_order}
        for j, colmap in enumerate(self.entries):
            for rname, coef in colmap.items():
                by_row[rname].append((j, coef))

        rows: list[Row] = []
        extra: list[Row] = []
        for rname in self.row_order:
            rtype = self.row_type[rname]
            b = self.rhs.get(rname, 0.0)
            pairs = by_row[rname]
            idx = tuple(j for j, _ in pairs)
            coefs = tuple(c for _, c in pairs)
            r = self.ranges.get(rname)
            if r is None:
                rows.append(Row(idx, coefs, rel_map[rtype], b, rname))
                continue
            # the named row keeps its declared sense; the companion row
            # closes the other side of the interval
            if rtype == "L":
                rows.append(Row(idx, coefs, Relation.LE, b, rname))
                extra.append(Row(idx, coefs, Relation.GE, b - abs(r),
                                 rname + "_rlo"))
            elif rtype == "G":
                rows.append(Row(idx, coefs, Relation.GE, b, rname))
                extra.append(Row(idx, coefs, Relation.LE, b + abs(r),
                                 rname + "_rlo"))
            elif r == 0:
                rows.append(Row(idx, coefs, Relation.EQ, b, rname))
            elif r > 0:  # E row spanning [b, b+r]
                rows.append(Row(idx, coefs, Relation.GE, b, rname))
                extra.append(Row(idx, coefs, Relation.LE, b + r,
                                 rname + "_rlo"))
            else:  # E row spanning [b+r, b]
                rows.append(Row(idx, coefs, Relation.LE, b, rname))
                extra.append(Row(idx, coefs, Relation.GE, b + r,
                                 rname + "_rlo"))
        rows.extend(extra)

        objective = np.array(self.obj_entries, dtype=float)
        constant = -self.obj_rhs
        if self.maximize:
            objective = -objective
            constant = -constant

        return ProblemInstance(
            name=self.name,
            objective=objective,
            rows=rows,
            lower_bounds=lower,
            upper_bounds=upper,
            var_class=classes,
            var_names=list(self.col_names),
            objective_constant=constant,
        )


def _num(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise MpsParseError(f"expected a number, got {token!r}", lineno) from None
