"""Exhaustive enumeration of integer assignments, used to verify :func:`solve_milp`.

Leaf LPs go through HiGHS rather than the in-house simplex so that the two
routes share no LP code. Enumeration is depth first in a fixed variable
order (small families first), trying the value nearest the LP solution
first. A partial assignment is dropped only when some row can no longer be satisfied
whatever the remaining variables do, or when the LP over the remaining
variables cannot beat the incumbent; when that LP is already integral it
is the best leaf of the subtree. All three shortcuts are exact, so the
result equals the best over the full enumeration.
"""

from __future__ import annotations

import math
import time
from typing import Optional

import highspy
import numpy as np

from ..model.ir import ModelIR
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED
from .milp import Solution

MAX_ENUMERATED = 24


class OracleGuardError(ValueError):
    """The model has more integer variables than the oracle will enumerate."""


class _HighsLP:
    """One HiGHS LP whose column bounds are changed in place between solves."""

    def __init__(self, form):
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("primal_feasibility_tolerance", 1e-9)
        h.setOptionValue("dual_feasibility_tolerance", 1e-9)
        lp = highspy.HighsLp()
        m, n = form.A.shape
        lp.num_col_ = n
        lp.num_row_ = m
        lp.col_cost_ = form.c * (-1.0 if form.maximize else 1.0)
        lp.col_lower_ = np.where(np.isfinite(form.lb), form.lb, -highspy.kHighsInf)
        lp.col_upper_ = np.where(np.isfinite(form.ub), form.ub, highspy.kHighsInf)
        lo = np.where(form.sense == ">=", form.b, np.where(form.sense == "=", form.b, -highspy.kHighsInf))
        hi = np.where(form.sense == "<=", form.b, np.where(form.sense == "=", form.b, highspy.kHighsInf))
        lp.row_lower_ = lo
        lp.row_upper_ = hi
        A = lp.a_matrix_
        A.format_ = highspy.MatrixFormat.kColwise
        starts, index, value = [0], [], []
        for j in range(n):
            nz = np.flatnonzero(form.A[:, j])
            index.extend(nz.tolist())
            value.extend(form.A[nz, j].tolist())
            starts.append(len(index))
        A.start_ = starts
        A.index_ = index
        A.value_ = value
        h.passModel(lp)
        self.h = h
        self.n = n
        self.lb = np.array(lp.col_lower_, dtype=float)
        self.ub = np.array(lp.col_upper_, dtype=float)

    def solve(self, lb, ub):
        lbh = np.where(np.isfinite(lb), lb, -highspy.kHighsInf)
        ubh = np.where(np.isfinite(ub), ub, highspy.kHighsInf)
        # only push changed columns so HiGHS keeps its basis for a hot start
        changed = np.flatnonzero((lbh != self.lb) | (ubh != self.ub)).astype(np.int32)
        if changed.size:
            self.h.changeColsBounds(changed.size, changed, lbh[changed], ubh[changed])
            self.lb[changed] = lbh[changed]
            self.ub[changed] = ubh[changed]
        self.h.run()
        status = self.h.getModelStatus()
        if status == highspy.HighsModelStatus.kOptimal:
            x = np.array(self.h.getSolution().col_value)
            return OPTIMAL, x
        if status == highspy.HighsModelStatus.kInfeasible:
            return INFEASIBLE, None
        if status in (highspy.HighsModelStatus.kUnbounded, highspy.HighsModelStatus.kUnboundedOrInfeasible):
            # resolve the ambiguity with a zero objective
            return UNBOUNDED, None
        raise RuntimeError(f"HiGHS returned {self.h.modelStatusToString(status)}")


def brute_force_oracle(ir: ModelIR, max_enumerated: int = MAX_ENUMERATED) -> Solution:
    """Best objective over every integer assignment, each with its continuous LP.

    Integer variables fixed by their bounds are not enumerated and do not
    count toward ``max_enumerated``. The result is deterministic for a
    given model.
    """
    start = time.perf_counter()
    form = ir.to_arrays()
    names = ir.names()
    sign = -1.0 if form.maximize else 1.0
    lb0 = form.lb.copy()
    ub0 = form.ub.copy()
    integer = np.flatnonzero(form.integer)
    lb0[integer] = np.ceil(lb0[integer] - 1e-9)
    ub0[integer] = np.floor(ub0[integer] + 1e-9)
    free = [int(j) for j in integer if ub0[j] > lb0[j]]
    free = _enumeration_order(free, names)
    if len(free) > max_enumerated:
        raise OracleGuardError(f"{len(free)} integer variables to enumerate, limit is {max_enumerated}")
    if any(not (math.isfinite(lb0[j]) and math.isfinite(ub0[j])) for j in free):
        raise OracleGuardError("enumerated integer variables need finite bounds")
    if np.any(lb0 > ub0):
        return Solution(INFEASIBLE, None, np.nan, names, nodes=0, wall_time=time.perf_counter() - start)

    lp = _HighsLP(form)
    # Row activity range. Columns outside ``free`` keep their bounds for the
    # whole search, so their share is computed once; infinite bounds only
    # ever contribute an infinite end of the range.
    A = form.A
    fixed = np.setdiff1d(np.arange(A.shape[1]), free)
    pos = np.clip(A, 0, None)
    neg = np.clip(A, None, 0)
    with np.errstate(invalid="ignore"):
        base_lo = np.nan_to_num(pos[:, fixed] * lb0[fixed] + neg[:, fixed] * ub0[fixed],
                                nan=0.0, neginf=-np.inf, posinf=np.inf).sum(axis=1)
        base_hi = np.nan_to_num(pos[:, fixed] * ub0[fixed] + neg[:, fixed] * lb0[fixed],
                                nan=0.0, neginf=-np.inf, posinf=np.inf).sum(axis=1)
    pos_f, neg_f = pos[:, free], neg[:, free]
    scale = 1e-9 * (1 + np.abs(form.b))
    check_le = form.sense != ">="
    check_ge = form.sense != "<="
    leaves = 0
    best = math.inf
    best_x: Optional[np.ndarray] = None
    tol = 1e-9

    def rows_possible(lb, ub) -> bool:
        lf, uf = lb[free], ub[free]
        lo = base_lo + pos_f @ lf + neg_f @ uf
        hi = base_hi + pos_f @ uf + neg_f @ lf
        return not (np.any(check_le & (lo > form.b + scale)) or np.any(check_ge & (hi < form.b - scale)))

    def beats(value) -> bool:
        return not math.isfinite(best) or value < best - tol * max(1.0, abs(best))

    def visit(depth, lb, ub):
        nonlocal best, best_x, leaves
        if not rows_possible(lb, ub):
            return
        status, x = lp.solve(lb, ub)
        if status == INFEASIBLE:
            return
        if status == UNBOUNDED:
            raise _Unbounded
        value = sign * float(form.c @ x)
        if not beats(value):
            return
        rest = free[depth:]
        if all(abs(x[j] - round(x[j])) <= 1e-9 for j in rest):
            # the LP optimum is itself an assignment of the remaining integers,
            # so no leaf below this node can do better
            leaves += 1
            best, best_x = value, x
            return
        j = free[depth]
        first = min(max(int(round(x[j])), int(lb[j])), int(ub[j]))
        order = [first] + [v for v in range(int(lb[j]), int(ub[j]) + 1) if v != first]
        for v in order:
            lb2 = lb.copy()
            ub2 = ub.copy()
            lb2[j] = ub2[j] = v
            visit(depth + 1, lb2, ub2)

    try:
        visit(0, lb0, ub0)
    except _Unbounded:
        return Solution(UNBOUNDED, None, sign * -math.inf, names, nodes=leaves,
                        wall_time=time.perf_counter() - start)
    if best_x is None:
        return Solution(INFEASIBLE, None, np.nan, names, nodes=leaves, wall_time=time.perf_counter() - start)
    x = np.clip(best_x, lb0, ub0)
    x[integer] = np.round(x[integer])
    obj = float(form.c @ x + form.c0)
    return Solution(OPTIMAL, x, obj, names, bound=obj, gap=0.0, nodes=leaves,
                    wall_time=time.perf_counter() - start)


def _enumeration_order(free, names):
    """Small variable families first, model order inside a family.

    Small families hold the aggregate decisions (build a station, upgrade a
    substation, electrify a truck). Fixing them early tightens the relaxation
    far more than fixing a single session, which keeps the search small.
    """
    family = [names[j].split("[", 1)[0] for j in free]
    size = {f: family.count(f) for f in family}
    return [j for _, _, j in sorted((size[f], j, j) for f, j in zip(family, free))]


class _Unbounded(Exception):
    pass
