"""Feasibility report for a candidate point of a :class:`ModelIR`."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ..model.ir import ModelIR


@dataclass(frozen=True)
class Violation:
    """One failed check: ``kind`` is ``constraint``, ``integrality`` or ``bound``."""

    kind: str
    tag: str
    amount: float


@dataclass
class ViolationReport:
    violations: List[Violation]
    tol: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def tags(self, kind: str = "constraint") -> List[str]:
        return [v.tag for v in self.violations if v.kind == kind]

    def families(self) -> List[str]:
        return sorted({v.tag.split("[", 1)[0] for v in self.violations})

    def summary(self) -> str:
        if self.ok:
            return "feasible"
        lines = [f"{len(self)} violation(s) above {self.tol:g}:"]
        lines += [f"  {v.kind:12s} {v.tag}  {v.amount:.3g}" for v in self.violations[:50]]
        if len(self) > 50:
            lines.append(f"  ... {len(self) - 50} more")
        return "\n".join(lines)


def check_solution(ir: ModelIR, sol, tol: float = 1e-6) -> ViolationReport:
    """List every constraint with residual above ``tol`` plus integrality and bound violations.

    ``sol`` is a :class:`Solution` or a plain vector ordered like
    ``ir.variables``. Residuals are absolute; the report is empty exactly
    when the point is feasible at ``tol``.
    """
    x = np.asarray(sol.x if hasattr(sol, "x") else sol, dtype=float)
    if x.shape != (ir.n_vars,):
        raise ValueError(f"expected {ir.n_vars} values, got shape {x.shape}")
    out: List[Violation] = []
    for con in ir.constraints:
        r = con.residual(x)
        if r > tol:
            out.append(Violation("constraint", con.tag, r))
    for v in ir.variables:
        val = x[v.index]
        if val < v.lower - tol:
            out.append(Violation("bound", v.name, v.lower - val))
        elif val > v.upper + tol:
            out.append(Violation("bound", v.name, val - v.upper))
        if v.is_integer:
            frac = abs(val - round(val))
            if frac > tol:
                out.append(Violation("integrality", v.name, frac))
    return ViolationReport(out, tol)
