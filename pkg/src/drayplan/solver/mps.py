"""Model and solution files for external solvers.

Two model formats are written: fixed-column MPS and CPLEX-style LP text.
Both are read back by this module. Numbers are printed with 12
significant digits. When any variable or row name is longer than eight
characters or contains whitespace, every name is replaced by a short
positional one (``C0000001``, ``R0000001``) and the originals are stored
in a JSON sidecar next to the model file (``<model>.names.json``).

Solution files hold one ``name value`` pair per line; ``#`` starts a
comment.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..model.ir import CONTINUOUS, INTEGER, BINARY, ModelIR
from .check import check_solution
from .milp import Solution

PathLike = Union[str, Path]
OBJ_ROW = "OBJ"
FEASIBLE = "feasible"


def _num(v: float) -> str:
    return f"{v:.12g}"


@dataclass
class NameMap:
    """Original names keyed by the names written to the file."""

    columns: Dict[str, str]
    rows: Dict[str, str]

    @classmethod
    def identity(cls, ir: ModelIR) -> "NameMap":
        return cls({v.name: v.name for v in ir.variables}, {c.tag: c.tag for c in ir.constraints})

    def to_json(self) -> dict:
        return {"columns": self.columns, "rows": self.rows}

    @classmethod
    def from_json(cls, data: dict) -> "NameMap":
        return cls(dict(data["columns"]), dict(data["rows"]))

    def inverse_columns(self) -> Dict[str, str]:
        return {orig: short for short, orig in self.columns.items()}


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".names.json")


def _needs_mangling(names, limit=8) -> bool:
    return any(len(n) > limit or re.search(r"\s", n) or n == OBJ_ROW for n in names)


def _file_names(ir: ModelIR, limit: Optional[int]) -> Tuple[List[str], List[str], bool]:
    cols = [v.name for v in ir.variables]
    rows = [c.tag for c in ir.constraints]
    if limit is not None and _needs_mangling(cols + rows, limit):
        return ([f"C{j + 1:07d}" for j in range(len(cols))],
                [f"R{r + 1:07d}" for r in range(len(rows))], True)
    return cols, rows, False


# ------------------------------------------------------------------------------------ writers
def _mps_line(f1: str = "", f2: str = "", f3: str = "", f4: str = "", f5: str = "", f6: str = "") -> str:
    """Fixed MPS fields start in columns 2, 5, 15, 25, 40 and 50."""
    line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:<12}"
    if f5:
        line += f"   {f5:<8}  {f6}"
    return line.rstrip()


def _bound_lines(name: str, lo: float, hi: float, integer: bool) -> List[Tuple[str, str]]:
    """``(type, value)`` pairs for one column; integer columns always get explicit bounds."""
    if lo == hi:
        return [("FX", _num(lo))]
    out = []
    if lo == -math.inf and hi == math.inf:
        return [("FR", "")]
    if lo == -math.inf:
        out.append(("MI", ""))
    elif lo != 0.0 or integer:
        out.append(("LO", _num(lo)))
    if hi != math.inf:
        out.append(("UP", _num(hi)))
    elif integer:
        out.append(("PL", ""))
    return out


def write_mps(ir: ModelIR, path: PathLike) -> Optional[NameMap]:
    cols, rows, mangled = _file_names(ir, 8)
    form_sense = {"<=": "L", ">=": "G", "=": "E"}
    obj = {v.index: c for v, c in ir.objective.terms}
    by_col: List[List[Tuple[str, float]]] = [[] for _ in ir.variables]
    for r, con in enumerate(ir.constraints):
        for v, coef in con.terms:
            by_col[v.index].append((rows[r], coef))
    out = [f"NAME          {ir.name}"]
    if ir.objective.sense == "max":
        out += ["OBJSENSE", "    MAX"]
    out.append("ROWS")
    out.append(_mps_line("N", OBJ_ROW))
    out += [_mps_line(form_sense[con.sense], rows[r]) for r, con in enumerate(ir.constraints)]
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for v in ir.variables:
        if v.is_integer != in_int:
            tag = "INTORG" if v.is_integer else "INTEND"
            out.append(_mps_line("", f"MARKER{marker:02d}", "'MARKER'", "", f"'{tag}'"))
            marker += v.is_integer
            in_int = v.is_integer
        entries = ([(OBJ_ROW, obj[v.index])] if v.index in obj else []) + by_col[v.index]
        if not entries:
            entries = [(OBJ_ROW, 0.0)]
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            f5, f6 = (pair[1][0], _num(pair[1][1])) if len(pair) == 2 else ("", "")
            out.append(_mps_line("", cols[v.index], pair[0][0], _num(pair[0][1]), f5, f6))
    if in_int:
        out.append(_mps_line("", f"MARKER{marker:02d}", "'MARKER'", "", "'INTEND'"))
    out.append("RHS")
    rhs = []
    if ir.objective.constant:
        rhs.append((OBJ_ROW, -ir.objective.constant))
    rhs += [(rows[r], con.rhs) for r, con in enumerate(ir.constraints) if con.rhs != 0.0]
    for k in range(0, len(rhs), 2):
        pair = rhs[k:k + 2]
        f5, f6 = (pair[1][0], _num(pair[1][1])) if len(pair) == 2 else ("", "")
        out.append(_mps_line("", "RHS", pair[0][0], _num(pair[0][1]), f5, f6))
    bounds = []
    for v in ir.variables:
        for kind, val in _bound_lines(v.name, v.lower, v.upper, v.is_integer):
            bounds.append(_mps_line(kind, "BND", cols[v.index], val))
    if bounds:
        out.append("BOUNDS")
        out += bounds
    out.append("ENDATA")
    Path(path).write_text("\n".join(out) + "\n")
    return NameMap(dict(zip(cols, (v.name for v in ir.variables))),
                   dict(zip(rows, (c.tag for c in ir.constraints)))) if mangled else None


def _lp_terms(terms) -> str:
    parts = []
    for name, coef in terms:
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_num(abs(coef))} {name}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp(ir: ModelIR, path: PathLike) -> Optional[NameMap]:
    cols, rows, mangled = _file_names(ir, 255)
    # LP text cannot hold names with operators or whitespace
    if any(re.search(r"[\s:<>=+\-*^]", n) for n in cols + rows):
        cols = [f"C{j + 1:07d}" for j in range(len(cols))]
        rows = [f"R{r + 1:07d}" for r in range(len(rows))]
        mangled = True
    out = [f"\\ Problem: {ir.name}", "Maximize" if ir.objective.sense == "max" else "Minimize"]
    obj = _lp_terms((cols[v.index], c) for v, c in ir.objective.terms)
    if ir.objective.constant:
        c0 = ir.objective.constant
        obj = (obj + " " if obj else "") + f"{'-' if c0 < 0 else '+'} {_num(abs(c0))}"
    out.append(f" obj: {obj if obj else '0 ' + cols[0] if cols else ''}".rstrip())
    out.append("Subject To")
    sym = {"<=": "<=", ">=": ">=", "=": "="}
    for r, con in enumerate(ir.constraints):
        body = _lp_terms((cols[v.index], c) for v, c in con.terms) or f"0 {cols[0]}"
        out.append(f" {rows[r]}: {body} {sym[con.sense]} {_num(con.rhs)}")
    out.append("Bounds")
    for v in ir.variables:
        name = cols[v.index]
        lo, hi = v.lower, v.upper
        if lo == hi:
            out.append(f" {name} = {_num(lo)}")
        elif lo == -math.inf and hi == math.inf:
            out.append(f" {name} free")
        else:
            lo_s = "-inf" if lo == -math.inf else _num(lo)
            hi_s = "+inf" if hi == math.inf else _num(hi)
            out.append(f" {lo_s} <= {name} <= {hi_s}")
    ints = [cols[v.index] for v in ir.variables if v.is_integer]
    if ints:
        out.append("Generals")
        out += [f" {n}" for n in ints]
    out.append("End")
    Path(path).write_text("\n".join(out) + "\n")
    return NameMap(dict(zip(cols, (v.name for v in ir.variables))),
                   dict(zip(rows, (c.tag for c in ir.constraints)))) if mangled else None


def export_model(ir: ModelIR, path: PathLike, format: str = "mps") -> Path:
    """Write ``ir`` as ``"mps"`` or ``"lp"``; a sidecar name map is written when names were shortened."""
    path = Path(path)
    writer = {"mps": write_mps, "lp": write_lp}.get(format.lower())
    if writer is None:
        raise ValueError(f"unknown model format {format!r}; use 'mps' or 'lp'")
    name_map = writer(ir, path)
    side = sidecar_path(path)
    if name_map is not None:
        side.write_text(json.dumps(name_map.to_json(), indent=1, sort_keys=True) + "\n")
    elif side.exists():
        side.unlink()
    return path


# ------------------------------------------------------------------------------------ readers
class ModelFileError(ValueError):
    pass


def _load_name_map(path: Path) -> Optional[NameMap]:
    side = sidecar_path(path)
    return NameMap.from_json(json.loads(side.read_text())) if side.exists() else None


def read_mps(path: PathLike) -> ModelIR:
    """Parse a fixed or free MPS file written by :func:`write_mps` or a compatible tool."""
    path = Path(path)
    name = path.stem
    sense = "min"
    rows: Dict[str, str] = {}
    row_order: List[str] = []
    obj_row = None
    col_order: List[str] = []
    col_int: Dict[str, bool] = {}
    coefs: Dict[str, List[Tuple[str, float]]] = {}
    rhs: Dict[str, float] = {}
    bounds: Dict[str, List[float]] = {}
    section = None
    integer = False
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0].upper()
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else name
            elif section == "OBJSENSE" and len(tok) > 1:
                sense = "max" if tok[1].upper().startswith("MAX") else "min"
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "OBJSENSE", "RANGES"):
                raise ModelFileError(f"{path}:{lineno}: unknown section {section}")
            if section == "RANGES":
                raise ModelFileError(f"{path}:{lineno}: RANGES are not supported")
            continue
        if section == "OBJSENSE":
            sense = "max" if tok[0].upper().startswith("MAX") else "min"
        elif section == "ROWS":
            kind, rname = tok[0].upper(), tok[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                continue
            rows[rname] = {"L": "<=", "G": ">=", "E": "="}[kind]
            row_order.append(rname)
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                integer = tok[2] == "'INTORG'"
                continue
            cname = tok[0]
            if cname not in coefs:
                coefs[cname] = []
                col_order.append(cname)
                col_int[cname] = integer
            for k in range(1, len(tok) - 1, 2):
                coefs[cname].append((tok[k], float(tok[k + 1])))
        elif section == "RHS":
            items = tok[1:] if len(tok) % 2 == 1 else tok
            for k in range(0, len(items) - 1, 2):
                rhs[items[k]] = float(items[k + 1])
        elif section == "BOUNDS":
            kind, cname = tok[0].upper(), tok[2]
            val = float(tok[3]) if len(tok) > 3 else None
            lo, hi = bounds.setdefault(cname, [0.0, math.inf])
            if kind == "UP":
                hi = val
                if val < 0 and lo == 0.0:
                    lo = -math.inf
            elif kind == "LO":
                lo = val
            elif kind == "FX":
                lo = hi = val
            elif kind == "FR":
                lo, hi = -math.inf, math.inf
            elif kind == "MI":
                lo = -math.inf
            elif kind == "PL":
                hi = math.inf
            elif kind == "BV":
                lo, hi = 0.0, 1.0
            elif kind == "LI":
                lo = val
                col_int[cname] = True
            elif kind == "UI":
                hi = val
                col_int[cname] = True
            else:
                raise ModelFileError(f"{path}:{lineno}: unknown bound type {kind}")
            bounds[cname] = [lo, hi]
    ir = ModelIR(name)
    refs = {}
    for cname in col_order:
        lo, hi = bounds.get(cname, [0.0, math.inf])
        kind = CONTINUOUS
        if col_int[cname]:
            if cname not in bounds:
                hi = 1.0  # the usual reading of an unbounded integer column
            kind = BINARY if lo >= 0 and hi <= 1 else INTEGER
        refs[cname] = ir.add_var(cname, (), kind, lo, hi)
    by_row: Dict[str, List] = {r: [] for r in row_order}
    obj_terms = []
    for cname in col_order:
        for rname, val in coefs[cname]:
            if rname == obj_row:
                obj_terms.append((refs[cname], val))
            elif rname in by_row:
                by_row[rname].append((refs[cname], val))
            else:
                raise ModelFileError(f"{path}: column {cname} references unknown row {rname}")
    for rname in row_order:
        ir.add_constraint(rname, (), by_row[rname], rows[rname], rhs.get(rname, 0.0))
    ir.set_objective(sense, obj_terms, -rhs.get(obj_row, 0.0))
    return ir


def _parse_lp_expr(text: str) -> Tuple[List[Tuple[str, float]], float]:
    terms: List[Tuple[str, float]] = []
    constant = 0.0
    tokens = text.split()
    sign = 1.0
    k = 0
    while k < len(tokens):
        tk = tokens[k]
        if tk in ("+", "-"):
            sign = -1.0 if tk == "-" else 1.0
            k += 1
            continue
        try:
            val = float(tk)
        except ValueError:
            terms.append((tk, sign))
            sign = 1.0
            k += 1
            continue
        if k + 1 < len(tokens) and tokens[k + 1] not in ("+", "-"):
            terms.append((tokens[k + 1], sign * val))
            k += 2
        else:
            constant += sign * val
            k += 1
        sign = 1.0
    return terms, constant


def read_lp(path: PathLike) -> ModelIR:
    """Parse the LP text written by :func:`write_lp` (one statement per line)."""
    path = Path(path)
    ir = ModelIR(path.stem)
    section = None
    sense = "min"
    obj_text = ""
    cons: List[Tuple[str, str, str, float]] = []
    bounds: Dict[str, Tuple[float, float]] = {}
    order: List[str] = []
    generals = set()

    def seen(n):
        if n not in bounds:
            bounds[n] = (0.0, math.inf)
            order.append(n)

    for raw in path.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        low = line.lower()
        if low in ("minimize", "maximize"):
            section, sense = "obj", ("max" if low == "maximize" else "min")
            continue
        if low in ("subject to", "bounds", "generals", "end"):
            section = low
            continue
        if section == "obj":
            obj_text = line.split(":", 1)[1] if ":" in line else line
        elif section == "subject to":
            tag, body = line.split(":", 1)
            m = re.match(r"(.*?)\s*(<=|>=|=)\s*(\S+)$", body.strip())
            if not m:
                raise ModelFileError(f"cannot parse constraint {line!r}")
            cons.append((tag.strip(), m.group(1), m.group(2), float(m.group(3))))
            for n, _ in _parse_lp_expr(m.group(1))[0]:
                seen(n)
        elif section == "bounds":
            tok = line.split()
            if len(tok) == 2 and tok[1] == "free":
                seen(tok[0])
                bounds[tok[0]] = (-math.inf, math.inf)
            elif len(tok) == 3 and tok[1] == "=":
                seen(tok[0])
                bounds[tok[0]] = (float(tok[2]), float(tok[2]))
            elif len(tok) == 5:
                seen(tok[2])
                bounds[tok[2]] = (float(tok[0]), float(tok[4]))
            else:
                raise ModelFileError(f"cannot parse bound {line!r}")
        elif section == "generals":
            generals.update(line.split())
    obj_terms, c0 = _parse_lp_expr(obj_text)
    for n, _ in obj_terms:
        seen(n)
    refs = {}
    for n in order:
        lo, hi = bounds[n]
        kind = CONTINUOUS
        if n in generals:
            kind = BINARY if lo >= 0 and hi <= 1 else INTEGER
        refs[n] = ir.add_var(n, (), kind, lo, hi)
    for tag, body, s, rhs in cons:
        terms, const = _parse_lp_expr(body)
        ir.add_constraint(tag, (), [(refs[n], c) for n, c in terms], s, rhs - const)
    ir.set_objective(sense, [(refs[n], c) for n, c in obj_terms], c0)
    return ir


def import_model(path: PathLike, format: Optional[str] = None) -> ModelIR:
    """Read a model file; names are restored from the sidecar when one exists.

    Restored names are the original structured names, so the result can be
    compared with the exported model term by term.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    reader = {"mps": read_mps, "lp": read_lp}.get(fmt)
    if reader is None:
        raise ValueError(f"cannot infer model format from {path.name!r}")
    ir = reader(path)
    name_map = _load_name_map(path)
    if name_map is None:
        return ir
    out = ModelIR(ir.name)
    refs = {}
    for v in ir.variables:
        refs[v.index] = out.add_var(name_map.columns.get(v.name, v.name), (), v.kind, v.lower, v.upper)
    for con in ir.constraints:
        out.add_constraint(name_map.rows.get(con.tag, con.tag), (),
                           [(refs[v.index], c) for v, c in con.terms], con.sense, con.rhs)
    out.set_objective(ir.objective.sense, [(refs[v.index], c) for v, c in ir.objective.terms],
                      ir.objective.constant)
    return out


# ---------------------------------------------------------------------------------- solutions
def write_solution(sol: Solution, path: PathLike, name_map: Optional[NameMap] = None) -> Path:
    """Write ``name value`` lines; names are shortened with ``name_map`` when given."""
    if sol.x is None:
        raise ValueError(f"solution with status {sol.status!r} has no values to write")
    short = name_map.inverse_columns() if name_map else {}
    lines = [f"# status {sol.status}", f"# objective {sol.objective:.17g}"]
    lines += [f"{short.get(n, n)} {v + 0.0:.17g}" for n, v in zip(sol.names, sol.x)]  # + 0.0 drops "-0"
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


class SolutionFileError(ValueError):
    pass


def import_solution(path: PathLike, ir: ModelIR, name_map: Optional[Union[NameMap, PathLike]] = None,
                    tol: float = 1e-6) -> Solution:
    """Read a ``name value`` solution file for ``ir`` and check it.

    ``name_map`` is a :class:`NameMap` or the model file whose sidecar holds
    one. Unknown names and variables without a value raise
    :class:`SolutionFileError` listing them. The result carries the
    :func:`check_solution` report in ``violations``.
    """
    if name_map is not None and not isinstance(name_map, NameMap):
        name_map = _load_name_map(Path(name_map))
    rename = name_map.columns if name_map else {}
    values: Dict[str, float] = {}
    unknown = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if len(tok) != 2:
            raise SolutionFileError(f"{path}:{lineno}: expected 'name value', got {raw!r}")
        name = rename.get(tok[0], tok[0])
        if not ir.has_var(name):
            unknown.append(tok[0])
            continue
        values[name] = float(tok[1])
    if unknown:
        raise SolutionFileError(f"unknown variable name(s): {', '.join(unknown)}")
    missing = [v.name for v in ir.variables if v.name not in values]
    if missing:
        raise SolutionFileError(f"missing value(s) for: {', '.join(missing)}")
    x = np.array([values[v.name] for v in ir.variables])
    report = check_solution(ir, x, tol)
    status = FEASIBLE if report.ok else "infeasible"
    sol = Solution(status, x, ir.objective_value(x), ir.names(), message="imported")
    sol.violations = report
    return sol
