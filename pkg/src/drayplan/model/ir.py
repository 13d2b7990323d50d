"""Solver-agnostic MILP container.

Variables and constraints carry structured names of the form
``family[i,j,t]`` (for example ``energy[3,17]``). The names are stable for a
given instance, so two builds can be diffed line by line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

CONTINUOUS = "continuous"
BINARY = "binary"
INTEGER = "integer"

SENSES = ("<=", "=", ">=")

Index = Union[int, Tuple[int, ...]]


def make_name(family: str, idx: Index = ()) -> str:
    if isinstance(idx, int):
        idx = (idx,)
    if not idx:
        return family
    return f"{family}[{','.join(str(int(v)) for v in idx)}]"


def split_name(name: str) -> Tuple[str, Tuple[int, ...]]:
    if "[" not in name:
        return name, ()
    family, rest = name.split("[", 1)
    inner = rest.rstrip("]")
    return family, tuple(int(v) for v in inner.split(",")) if inner else ()


@dataclass(frozen=True)
class VarRef:
    index: int
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = math.inf

    @property
    def family(self) -> str:
        return split_name(self.name)[0]

    @property
    def indices(self) -> Tuple[int, ...]:
        return split_name(self.name)[1]

    @property
    def is_integer(self) -> bool:
        return self.kind != CONTINUOUS


@dataclass(frozen=True)
class LinConstraint:
    terms: Tuple[Tuple[VarRef, float], ...]
    sense: str
    rhs: float
    tag: str

    @property
    def family(self) -> str:
        return split_name(self.tag)[0]

    def activity(self, x: np.ndarray) -> float:
        return float(sum(coef * x[v.index] for v, coef in self.terms))

    def residual(self, x: np.ndarray) -> float:
        """Amount by which ``x`` violates the constraint (0 when satisfied)."""
        lhs = self.activity(x)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass
class LinExpr:
    """A named linear expression ``sum(coef * var) + constant`` keyed by variable index."""

    coefs: Dict[int, float] = field(default_factory=dict)
    constant: float = 0.0

    def add(self, var: VarRef, coef: float) -> "LinExpr":
        if coef:
            self.coefs[var.index] = self.coefs.get(var.index, 0.0) + coef
        return self

    def value(self, x: np.ndarray) -> float:
        return self.constant + float(sum(c * x[j] for j, c in self.coefs.items()))

    def __add__(self, other: "LinExpr") -> "LinExpr":
        out = LinExpr(dict(self.coefs), self.constant + other.constant)
        for j, c in other.coefs.items():
            out.coefs[j] = out.coefs.get(j, 0.0) + c
        return out


@dataclass(frozen=True)
class Objective:
    sense: str = "min"
    terms: Tuple[Tuple[VarRef, float], ...] = ()
    constant: float = 0.0


@dataclass
class ArrayForm:
    """Dense matrix view of a model: ``rows_lo <= A x <= rows_hi`` style is avoided;
    each row has one ``sense`` in ``{'<=', '=', '>='}``."""

    c: np.ndarray
    c0: float
    maximize: bool
    A: np.ndarray
    sense: np.ndarray
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray


class ModelIR:
    """Growing list of variables and constraints plus one objective.

    Builders add to it in place; once built, solvers only read it. Variable
    bounds may be tightened with :meth:`set_bounds`, which replaces the entry
    in :attr:`variables`. Constraint terms keep their original ``VarRef``, so
    solvers take bounds from :attr:`variables` only.
    """

    def __init__(self, name: str = "drayplan"):
        self.name = name
        self.variables: List[VarRef] = []
        self.constraints: List[LinConstraint] = []
        self.objective = Objective()
        self.expressions: Dict[str, LinExpr] = {}
        self.warnings: List[str] = []
        self._by_name: Dict[str, int] = {}
        self._tags: Dict[str, int] = {}

    # ------------------------------------------------------------------ variables
    def add_var(self, family: str, idx: Index = (), kind: str = CONTINUOUS,
                lower: float = 0.0, upper: float = math.inf) -> VarRef:
        name = make_name(family, idx)
        if name in self._by_name:
            raise ValueError(f"duplicate variable {name}")
        if kind == BINARY:
            lower, upper = max(lower, 0.0), min(upper, 1.0)
        if lower > upper:
            raise ValueError(f"{name}: lower bound {lower} above upper bound {upper}")
        var = VarRef(len(self.variables), name, kind, float(lower), float(upper))
        self.variables.append(var)
        self._by_name[name] = var.index
        return var

    def var(self, family: str, idx: Index = ()) -> VarRef:
        return self.variables[self._by_name[make_name(family, idx)]]

    def get(self, family: str, idx: Index = ()) -> Optional[VarRef]:
        j = self._by_name.get(make_name(family, idx))
        return None if j is None else self.variables[j]

    def by_name(self, name: str) -> VarRef:
        return self.variables[self._by_name[name]]

    def has_var(self, name: str) -> bool:
        return name in self._by_name

    def family(self, family: str) -> List[VarRef]:
        return [v for v in self.variables if v.family == family]

    def set_bounds(self, var: Union[VarRef, str], lower: Optional[float] = None,
                   upper: Optional[float] = None) -> VarRef:
        j = self._by_name[var] if isinstance(var, str) else var.index
        old = self.variables[j]
        new = replace(
            old,
            lower=old.lower if lower is None else float(lower),
            upper=old.upper if upper is None else float(upper),
        )
        if new.lower > new.upper + 1e-12:
            raise ValueError(f"{new.name}: bounds [{new.lower}, {new.upper}] are empty")
        self.variables[j] = new
        return new

    def fix(self, var: Union[VarRef, str], value: float) -> VarRef:
        return self.set_bounds(var, value, value)

    # ---------------------------------------------------------------- constraints
    def add_constraint(self, family: str, idx: Index, terms, sense: str, rhs: float) -> str:
        """Add ``sum(coef * var) sense rhs``; duplicate variables are merged.

        ``terms`` is an iterable of ``(VarRef, coef)`` pairs or a mapping.
        """
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        tag = make_name(family, idx)
        if tag in self._tags:
            raise ValueError(f"duplicate constraint tag {tag}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: Dict[int, float] = {}
        for var, coef in items:
            if not math.isfinite(coef):
                raise ValueError(f"{tag}: non-finite coefficient for {var.name}")
            merged[var.index] = merged.get(var.index, 0.0) + float(coef)
        row = tuple((self.variables[j], c) for j, c in merged.items() if c != 0.0)
        self._tags[tag] = len(self.constraints)
        self.constraints.append(LinConstraint(row, sense, float(rhs), tag))
        return tag

    def constraint(self, tag: str) -> LinConstraint:
        return self.constraints[self._tags[tag]]

    def has_constraint(self, tag: str) -> bool:
        return tag in self._tags

    def tags(self, family: Optional[str] = None) -> List[str]:
        return [c.tag for c in self.constraints if family is None or c.family == family]

    # ------------------------------------------------------------------ objective
    def set_objective(self, sense: str, terms, constant: float = 0.0) -> None:
        if sense not in ("min", "max"):
            raise ValueError(f"objective sense must be 'min' or 'max', got {sense!r}")
        if isinstance(terms, LinExpr):
            constant += terms.constant
            terms = [(self.variables[j], c) for j, c in terms.coefs.items()]
        elif isinstance(terms, Mapping):
            terms = list(terms.items())
        merged: Dict[int, float] = {}
        for var, coef in terms:
            merged[var.index] = merged.get(var.index, 0.0) + float(coef)
        self.objective = Objective(
            sense, tuple((self.variables[j], c) for j, c in merged.items() if c != 0.0), float(constant)
        )

    def objective_value(self, x: np.ndarray) -> float:
        return self.objective.constant + float(sum(c * x[v.index] for v, c in self.objective.terms))

    # ---------------------------------------------------------------------- views
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def integer_vars(self) -> List[VarRef]:
        return [v for v in self.variables if v.is_integer]

    def counts(self) -> Dict[str, int]:
        """Number of variables and constraints per family."""
        out: Dict[str, int] = {}
        for v in self.variables:
            out[f"var:{v.family}"] = out.get(f"var:{v.family}", 0) + 1
        for c in self.constraints:
            out[f"con:{c.family}"] = out.get(f"con:{c.family}", 0) + 1
        return out

    def to_arrays(self) -> ArrayForm:
        n, m = self.n_vars, self.n_constraints
        A = np.zeros((m, n))
        sense = np.empty(m, dtype="<U2")
        b = np.empty(m)
        for r, con in enumerate(self.constraints):
            for v, coef in con.terms:
                A[r, v.index] += coef
            sense[r] = con.sense
            b[r] = con.rhs
        c = np.zeros(n)
        for v, coef in self.objective.terms:
            c[v.index] += coef
        lb = np.array([v.lower for v in self.variables], dtype=float)
        ub = np.array([v.upper for v in self.variables], dtype=float)
        integer = np.array([v.is_integer for v in self.variables], dtype=bool)
        return ArrayForm(c, self.objective.constant, self.objective.sense == "max", A, sense, b, lb, ub, integer)

    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def copy(self) -> "ModelIR":
        other = ModelIR(self.name)
        other.variables = list(self.variables)
        other.constraints = list(self.constraints)
        other.objective = self.objective
        other.expressions = {k: LinExpr(dict(e.coefs), e.constant) for k, e in self.expressions.items()}
        other.warnings = list(self.warnings)
        other._by_name = dict(self._by_name)
        other._tags = dict(self._tags)
        return other

    @classmethod
    def from_arrays(cls, c: Sequence[float], A, sense: Sequence[str], b: Sequence[float],
                    lb: Sequence[float], ub: Sequence[float], integer: Optional[Sequence[bool]] = None,
                    maximize: bool = False, constant: float = 0.0, name: str = "model") -> "ModelIR":
        """Build a model with variables ``x[j]`` and rows ``row[r]`` from dense data."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        n = len(c)
        integer = np.zeros(n, dtype=bool) if integer is None else np.asarray(integer, dtype=bool)
        ir = cls(name)
        xs = []
        for j in range(n):
            kind = CONTINUOUS
            if integer[j]:
                kind = BINARY if (lb[j] >= 0 and ub[j] <= 1) else INTEGER
            xs.append(ir.add_var("x", j, kind, lb[j], ub[j]))
        for r in range(len(b)):
            ir.add_constraint("row", r, [(xs[j], A[r, j]) for j in np.flatnonzero(A[r])], sense[r], b[r])
        ir.set_objective("max" if maximize else "min", [(xs[j], c[j]) for j in range(n)], constant)
        return ir
