"""Best-bound branch-and-bound on top of :func:`solve_lp`."""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..model.ir import ArrayForm, ModelIR
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LPSolution, solve_lp

LIMIT = "limit"


@dataclass(frozen=True)
class SolverParams:
    """Tolerances, limits and branching rule of :func:`solve_milp`.

    ``branching`` is ``"most-fractional"`` (default) or ``"pseudo-cost"``,
    which scores candidates by the average objective change seen when
    branching on them before and falls back to fractionality while a
    variable has no history. Pseudo-cost is often much faster on planning
    models with many session indicators.
    """

    feas_tol: float = 1e-6
    int_tol: float = 1e-6
    rel_gap: float = 1e-6
    node_limit: Optional[int] = None
    time_limit: Optional[float] = None
    branching: str = "most-fractional"

    def __post_init__(self):
        for name in ("feas_tol", "int_tol", "rel_gap"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.branching not in ("most-fractional", "pseudo-cost"):
            raise ValueError(f"unknown branching rule {self.branching!r}")


@dataclass
class Solution:
    """Values of every model variable plus solve statistics.

    ``bound`` is the best proven bound in the model's own objective sense.
    ``violations`` is filled by :func:`import_solution`.
    """

    status: str
    x: Optional[np.ndarray]
    objective: float
    names: Tuple[str, ...] = ()
    bound: float = np.nan
    gap: float = np.nan
    nodes: int = 0
    wall_time: float = 0.0
    message: str = ""
    violations: Optional[object] = None
    _index: Dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            self._index = {n: j for j, n in enumerate(self.names)}

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL

    @property
    def has_values(self) -> bool:
        return self.x is not None

    def __getitem__(self, name: str) -> float:
        return float(self.x[self._index[name]])

    def get(self, name: str, default: float = 0.0) -> float:
        j = self._index.get(name)
        return default if j is None or self.x is None else float(self.x[j])

    def values(self) -> Dict[str, float]:
        if self.x is None:
            return {}
        return {n: float(v) for n, v in zip(self.names, self.x)}


def relative_gap(incumbent: float, bound: float) -> float:
    if not (math.isfinite(incumbent) and math.isfinite(bound)):
        return math.inf
    return abs(incumbent - bound) / max(1.0, abs(incumbent))


def _objective_is_integral(form: ArrayForm) -> bool:
    nz = np.flatnonzero(form.c)
    if nz.size == 0:
        return True
    return bool(np.all(form.integer[nz]) and np.allclose(form.c[nz], np.round(form.c[nz])))


@dataclass(order=True)
class _Node:
    bound: float
    node_id: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    lp: LPSolution = field(compare=False)
    depth: int = field(default=0, compare=False)
    branched: Optional[Tuple[int, int, float]] = field(default=None, compare=False)


def solve_milp(model: ModelIR, params: SolverParams = SolverParams()) -> Solution:
    """Solve ``model`` to ``params.rel_gap`` optimality.

    Nodes are explored best bound first with ties broken by creation order,
    so runs are deterministic. Hitting ``node_limit`` or ``time_limit``
    returns status ``"limit"`` with the incumbent (if any) and its gap.
    """
    start = time.perf_counter()
    form = model.to_arrays()
    names = model.names()
    sign = -1.0 if form.maximize else 1.0  # internal minimization of sign * objective
    integer = np.flatnonzero(form.integer)
    lb0 = form.lb.copy()
    ub0 = form.ub.copy()
    lb0[integer] = np.ceil(lb0[integer] - params.int_tol)
    ub0[integer] = np.floor(ub0[integer] + params.int_tol)
    integral_obj = _objective_is_integral(form)
    lp_kw = dict(feas_tol=min(params.feas_tol, 1e-9))

    def internal(lp: LPSolution) -> float:
        return sign * lp.objective

    def tighten(bound: float) -> float:
        return math.ceil(bound - 1e-6) if integral_obj and math.isfinite(bound) else bound

    def result(status, x, obj_internal, bound_internal, nodes, message=""):
        obj = sign * obj_internal if x is not None else np.nan
        bnd = sign * bound_internal if math.isfinite(bound_internal) else sign * bound_internal
        gap = relative_gap(obj_internal, bound_internal) if x is not None else math.inf
        if status == OPTIMAL:
            gap = min(gap, params.rel_gap) if gap <= params.rel_gap else gap
        return Solution(status, x, obj, names, bnd, gap, nodes, time.perf_counter() - start, message)

    root = solve_lp(form, lb0, ub0, **lp_kw)
    if root.status == INFEASIBLE:
        return result(INFEASIBLE, None, math.inf, math.inf, 1)
    if root.status == UNBOUNDED:
        return Solution(UNBOUNDED, None, sign * -math.inf, names, nodes=1,
                        wall_time=time.perf_counter() - start)
    if root.status != OPTIMAL:
        return result(root.status, None, math.inf, -math.inf, 1, root.message)

    pseudo = _PseudoCosts(form.c.size) if params.branching == "pseudo-cost" else None
    counter = 0
    heap: List[_Node] = [_Node(tighten(internal(root)), counter, lb0, ub0, root)]
    incumbent_x: Optional[np.ndarray] = None
    incumbent = math.inf
    nodes = 0
    hit_limit = False

    def prunable(bound: float) -> bool:
        if not math.isfinite(incumbent):
            return False
        return bound >= incumbent - params.rel_gap * max(1.0, abs(incumbent))

    while heap:
        if params.node_limit is not None and nodes >= params.node_limit:
            hit_limit = True
            break
        if params.time_limit is not None and time.perf_counter() - start > params.time_limit:
            hit_limit = True
            break
        node = heapq.heappop(heap)
        if prunable(node.bound):
            continue
        nodes += 1
        x = node.lp.x
        if pseudo is not None and node.branched is not None:
            pseudo.update(node.branched, internal(node.lp))
        j = _pick_branch(x, integer, params.int_tol, pseudo)
        if j is None:
            polished = _polish(form, node.lb, node.ub, x, integer, dict(lp_kw, warm_start=node.lp.warm_start))
            if polished is not None and internal(polished) < incumbent:
                incumbent = internal(polished)
                incumbent_x = polished.x
            continue
        v = x[j]
        parent_obj = internal(node.lp)
        for lo, hi in ((node.lb[j], math.floor(v)), (math.ceil(v), node.ub[j])):
            if lo > hi:
                continue
            lb = node.lb.copy()
            ub = node.ub.copy()
            lb[j], ub[j] = lo, hi
            child = solve_lp(form, lb, ub, warm_start=node.lp.warm_start, **lp_kw)
            if child.status != OPTIMAL:
                continue
            bound = tighten(internal(child))
            if prunable(bound):
                continue
            counter += 1
            frac = (v - math.floor(v)) if hi == math.floor(v) else (math.ceil(v) - v)
            heapq.heappush(heap, _Node(bound, counter, lb, ub, child, node.depth + 1,
                                       (j, 0 if hi == math.floor(v) else 1, frac, parent_obj)))

    open_bound = min((n.bound for n in heap), default=math.inf)
    if hit_limit:
        best_bound = min(open_bound, incumbent)
        status = LIMIT
        msg = "node limit" if params.node_limit is not None and nodes >= params.node_limit else "time limit"
        return result(status, incumbent_x, incumbent, best_bound, nodes, msg)
    if incumbent_x is None:
        return result(INFEASIBLE, None, math.inf, math.inf, nodes)
    best_bound = min(open_bound, incumbent)
    return result(OPTIMAL, incumbent_x, incumbent, best_bound, nodes)


def _pick_branch(x, integer, int_tol, pseudo) -> Optional[int]:
    if integer.size == 0:
        return None
    vals = x[integer]
    frac = np.abs(vals - np.round(vals))
    mask = frac > int_tol
    if not mask.any():
        return None
    cands = integer[mask]
    if pseudo is not None:
        scores = np.array([pseudo.score(j, x[j]) for j in cands])
        if np.isfinite(scores).all() and scores.max() > 0:
            return int(cands[np.argmax(scores)])
    dist = np.minimum(x[cands] - np.floor(x[cands]), np.ceil(x[cands]) - x[cands])
    return int(cands[np.argmax(dist)])


def _polish(form: ArrayForm, lb, ub, x, integer, lp_kw) -> Optional[LPSolution]:
    """Re-solve with every integer variable fixed at its rounded value."""
    lb = lb.copy()
    ub = ub.copy()
    r = np.round(x[integer])
    lb[integer] = r
    ub[integer] = r
    lp = solve_lp(form, lb, ub, **lp_kw)
    return lp if lp.status == OPTIMAL else None


class _PseudoCosts:
    """Average objective change per unit of fractionality, per variable and direction."""

    def __init__(self, n):
        self.sum = np.zeros((n, 2))
        self.count = np.zeros((n, 2))

    def update(self, branched, child_obj):
        j, side, frac, parent_obj = branched
        if frac > 0:
            self.sum[j, side] += max(0.0, child_obj - parent_obj) / frac
            self.count[j, side] += 1

    def score(self, j, v):
        f = v - math.floor(v)
        mean = np.where(self.count[j] > 0, self.sum[j] / np.maximum(self.count[j], 1), np.nan)
        if np.isnan(mean).any():
            # no history in one direction yet: fall back to fractionality
            return min(f, 1 - f)
        down, up = mean[0] * f, mean[1] * (1 - f)
        return max(down, 1e-6) * max(up, 1e-6)
