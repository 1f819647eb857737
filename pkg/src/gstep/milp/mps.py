"""Fixed-format MPS export and import.

Rows and columns get positional names (``R0000001``, ``C0000001``) so every
name fits the 8-character fixed-format field; the structured variable names
and row families travel in ``*`` comment lines and are restored on import
when present.  Values are written with ``repr`` so a round trip is exact,
which means a value may run past the classic 12-character field; readers
that split on whitespace (this one, HiGHS, CBC) accept that.

The objective constant is stored as the negated RHS of the objective row,
the convention shared by CPLEX and HiGHS.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .instance import BINARY, CONTINUOUS, MilpInstance, Variable

OBJ = "OBJ"


class MpsFormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def col_name(j: int) -> str:
    return f"C{j + 1:07d}"


def row_name(i: int) -> str:
    return f"R{i + 1:07d}"


def _num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v)) if v != 0 else "0"
    return repr(v)


def _field(kind: str, a: str, b: str = "", v: str = "") -> str:
    # columns 2-3 type, 5-12 name, 15-22 name, 25+ value
    line = f" {kind:<2} {a:<8}  {b:<8}  {v}" if kind else f"    {a:<8}  {b:<8}  {v}"
    return line.rstrip()


def write_mps(instance: MilpInstance, path: str | Path | None = None) -> str:
    """Serialise ``instance``; writes to ``path`` when given and returns the text."""
    out: list[str] = []
    out.append(f"* gstep-mps/1 {json.dumps(instance.name)}")
    for i, (fam, name) in enumerate(zip(instance.row_family, instance.row_names)):
        out.append(f"* ROW {row_name(i)} {fam} {name}")
    for j, v in enumerate(instance.variables):
        out.append(f"* COL {col_name(j)} {v.symbol} {json.dumps(list(v.index), separators=(',', ':'))}")
    out.append(f"NAME          {_safe_name(instance.name)}")
    out.append("ROWS")
    out.append(f" N  {OBJ}")
    for i, s in enumerate(instance.senses):
        out.append(f" {s}  {row_name(i)}")
    out.append("COLUMNS")
    A = instance.A.tocsc()
    A.sort_indices()
    in_int = False
    for j, v in enumerate(instance.variables):
        is_bin = v.kind == BINARY
        if is_bin and not in_int:
            out.append("    MARKER                 'MARKER'                 'INTORG'")
            in_int = True
        elif not is_bin and in_int:
            out.append("    MARKER                 'MARKER'                 'INTEND'")
            in_int = False
        cj = col_name(j)
        lo, hi = A.indptr[j], A.indptr[j + 1]
        if instance.c[j] != 0.0 or lo == hi:
            out.append(_field("", cj, OBJ, _num(instance.c[j])))
        for k in range(lo, hi):
            out.append(_field("", cj, row_name(int(A.indices[k])), _num(A.data[k])))
    if in_int:
        out.append("    MARKER                 'MARKER'                 'INTEND'")
    out.append("RHS")
    if instance.obj_offset != 0.0:
        out.append(_field("", "RHS", OBJ, _num(-instance.obj_offset)))
    for i, r in enumerate(instance.rhs):
        if r != 0.0:
            out.append(_field("", "RHS", row_name(i), _num(r)))
    bounds = []
    for j, v in enumerate(instance.variables):
        bounds += _bound_lines(col_name(j), v)
    if bounds:
        out.append("BOUNDS")
        out += bounds
    out.append("ENDATA")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name) or "gstep"


def _bound_lines(cj: str, v: Variable) -> list[str]:
    lo, hi = v.lo, v.hi
    if v.kind == BINARY:
        # explicit bounds: readers disagree on default integer bounds
        out = [] if lo == 0.0 else [_field("LO", "BND", cj, _num(lo))]
        return out + [_field("UP", "BND", cj, _num(hi))]
    if lo == hi:
        return [_field("FX", "BND", cj, _num(lo))]
    if lo == -np.inf and hi == np.inf:
        return [_field("FR", "BND", cj)]
    out = []
    if lo == -np.inf:
        out.append(_field("MI", "BND", cj))
    elif lo != 0.0:
        out.append(_field("LO", "BND", cj, _num(lo)))
    if hi != np.inf:
        out.append(_field("UP", "BND", cj, _num(hi)))
    return out


def read_mps(source: str | Path, *, text: str | None = None) -> MilpInstance:
    """Parse fixed- or free-form MPS produced by :func:`write_mps` or another tool.

    Without gstep comment metadata, variables get ``symbol = column name``
    and an empty index, and rows get family ``"row"``.
    """
    if text is None:
        text = Path(source).read_text(encoding="utf-8")
    name = "gstep"
    meta_rows: dict[str, tuple[str, str]] = {}
    meta_cols: dict[str, tuple[str, tuple]] = {}
    row_order: list[str] = []
    senses: list[str] = []
    obj_row: str | None = None
    col_order: list[str] = []
    col_kind: dict[str, str] = {}
    entries: list[tuple[str, str, float]] = []
    cost: dict[str, float] = {}
    rhs: dict[str, float] = {}
    offset = 0.0
    lo: dict[str, float] = {}
    hi: dict[str, float] = {}
    section = None
    in_int = False
    ended = False
    for ln, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw[1:].split(maxsplit=3)
            if len(parts) >= 2 and parts[0] == "gstep-mps/1":
                name = json.loads(raw[1:].split(maxsplit=1)[1])
            elif len(parts) == 4 and parts[0] == "ROW":
                meta_rows[parts[1]] = (parts[2], parts[3])
            elif len(parts) == 4 and parts[0] == "COL":
                meta_cols[parts[1]] = (parts[2], tuple(json.loads(parts[3])))
            continue
        if not raw[0].isspace():
            tok = raw.split()
            section = tok[0].upper()
            if section == "NAME":
                if len(tok) > 1 and name == "gstep":
                    name = tok[1]
            elif section == "ENDATA":
                ended = True
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "OBJSENSE"):
                raise MpsFormatError(f"unknown section {section}", ln)
            continue
        tok = raw.split()
        if section == "ROWS":
            if len(tok) != 2:
                raise MpsFormatError("ROWS entry needs a type and a name", ln)
            kind, rn = tok[0].upper(), tok[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = rn
                continue
            if kind not in ("E", "L", "G"):
                raise MpsFormatError(f"bad row type {kind}", ln)
            row_order.append(rn)
            senses.append(kind)
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                if tok[2] == "'INTORG'":
                    in_int = True
                elif tok[2] == "'INTEND'":
                    in_int = False
                else:
                    raise MpsFormatError(f"bad marker {tok[2]}", ln)
                continue
            if len(tok) not in (3, 5):
                raise MpsFormatError("COLUMNS entry needs column, row, value [row, value]", ln)
            cn = tok[0]
            if cn not in col_kind:
                col_order.append(cn)
                col_kind[cn] = BINARY if in_int else CONTINUOUS
            for rn, val in zip(tok[1::2], tok[2::2]):
                v = _float(val, ln)
                if rn == obj_row:
                    cost[cn] = cost.get(cn, 0.0) + v
                else:
                    entries.append((cn, rn, v))
        elif section == "RHS":
            if len(tok) not in (3, 5, 2, 4):
                raise MpsFormatError("RHS entry malformed", ln)
            pairs = tok[1:] if len(tok) % 2 == 1 else tok
            for rn, val in zip(pairs[0::2], pairs[1::2]):
                v = _float(val, ln)
                if rn == obj_row:
                    offset = -v
                else:
                    rhs[rn] = v
        elif section == "BOUNDS":
            kind = tok[0].upper()
            if kind in ("FR", "MI", "PL", "BV"):
                if len(tok) < 3:
                    raise MpsFormatError("bound entry needs a column", ln)
                cn, val = tok[2], None
            else:
                if len(tok) < 4:
                    raise MpsFormatError("bound entry needs a column and value", ln)
                cn, val = tok[2], _float(tok[3], ln)
            if cn not in col_kind:
                raise MpsFormatError(f"bound on unknown column {cn}", ln)
            if kind == "UP":
                hi[cn] = val
                if val < 0 and lo.get(cn, 0.0) == 0.0 and col_kind[cn] != BINARY:
                    lo[cn] = -np.inf
            elif kind == "LO":
                lo[cn] = val
            elif kind == "FX":
                lo[cn] = hi[cn] = val
            elif kind == "FR":
                lo[cn], hi[cn] = -np.inf, np.inf
            elif kind == "MI":
                lo[cn] = -np.inf
            elif kind == "PL":
                hi[cn] = np.inf
            elif kind == "BV":
                col_kind[cn] = BINARY
                lo[cn], hi[cn] = 0.0, 1.0
            else:
                raise MpsFormatError(f"unsupported bound type {kind}", ln)
        elif section == "RANGES":
            raise MpsFormatError("RANGES are not supported", ln)
        elif section is None:
            raise MpsFormatError("data before the first section", ln)
    if not ended:
        raise MpsFormatError("missing ENDATA; the file looks truncated")
    rix = {r: i for i, r in enumerate(row_order)}
    cix = {c: j for j, c in enumerate(col_order)}
    try:
        ri = [rix[r] for _, r, _ in entries]
    except KeyError as exc:
        raise MpsFormatError(f"coefficient in unknown row {exc.args[0]}") from None
    ci = [cix[c] for c, _, _ in entries]
    A = sp.csr_matrix(([v for _, _, v in entries], (ri, ci)), shape=(len(row_order), len(col_order)))
    A.sum_duplicates()
    unknown = set(rhs) - set(rix)
    if unknown:
        raise MpsFormatError(f"RHS for unknown row {sorted(unknown)[0]}")
    variables = []
    for cn in col_order:
        kind = col_kind[cn]
        sym, idx = meta_cols.get(cn, (cn, ()))
        l = lo.get(cn, 0.0)
        h = hi.get(cn, 1.0 if kind == BINARY else np.inf)
        variables.append(Variable(sym, idx, kind, float(l), float(h)))
    inst = MilpInstance(
        name=name,
        variables=variables,
        c=np.array([cost.get(cn, 0.0) for cn in col_order], dtype=float),
        A=A,
        senses=np.array(senses, dtype="<U1"),
        rhs=np.array([rhs.get(r, 0.0) for r in row_order], dtype=float),
        row_names=[meta_rows.get(r, ("row", r))[1] for r in row_order],
        row_family=[meta_rows.get(r, ("row", r))[0] for r in row_order],
        obj_offset=offset,
    )
    inst.validate()
    return inst


def _float(s: str, ln: int) -> float:
    try:
        return float(s)
    except ValueError:
        raise MpsFormatError(f"bad number {s!r}", ln) from None


def structural_diff(a: MilpInstance, b: MilpInstance) -> list[str]:
    """Differences in rows, columns, bounds, objective and binary markers."""
    out = []
    if a.A.shape != b.A.shape:
        return [f"shape {a.A.shape} != {b.A.shape}"]
    if (a.A != b.A).nnz:
        out.append("matrix")
    for label, x, y in (("objective", a.c, b.c), ("rhs", a.rhs, b.rhs), ("lower bounds", a.lo, b.lo),
                        ("upper bounds", a.hi, b.hi)):
        if not np.array_equal(x, y):
            out.append(label)
    if not np.array_equal(a.senses, b.senses):
        out.append("senses")
    if not np.array_equal(a.binary_mask, b.binary_mask):
        out.append("binary markers")
    if a.obj_offset != b.obj_offset:
        out.append("objective constant")
    if [v.name for v in a.variables] != [v.name for v in b.variables]:
        out.append("column names")
    if a.row_names != b.row_names or a.row_family != b.row_family:
        out.append("row names")
    return out
