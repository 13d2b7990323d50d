"""Bounded-variable revised simplex.

Rows are turned into equalities with one slack each (``A x + s = b``; the
slack bounds encode the row sense). Phase 1 adds an artificial column for
every row whose slack would start outside its bounds and drives their sum
to zero; phase 2 then optimizes the real objective with the artificials
fixed at zero. Dantzig pricing switches to Bland's rule for the rest of a
phase after a long run of degenerate pivots, which guarantees termination.

The basis inverse is kept explicitly and updated with rank-one eta steps;
it is recomputed from scratch every ``refactor_every`` pivots and before
any solution is reported. A solution is only labelled optimal after its
primal residual and reduced costs pass a check on a fresh factorization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..model.ir import ArrayForm, ModelIR

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL = "numerical"
ITERATION_LIMIT = "iteration_limit"


@dataclass
class LPSolution:
    status: str
    x: Optional[np.ndarray]
    objective: float
    duals: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    dual_bound: float = np.nan
    iterations: int = 0
    message: str = ""
    warm_start: Optional["WarmStart"] = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Simplex:
    def __init__(self, A, b, lo, hi, feas_tol, opt_tol, max_iter, bland_after, refactor_every):
        self.A = A
        self.b = b
        self.lo = lo
        self.hi = hi
        self.m, self.n = A.shape
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        self.max_iter = max_iter
        self.bland_after = bland_after
        self.refactor_every = refactor_every
        self.iterations = 0

    # ------------------------------------------------------------------ linear algebra
    def refactor(self) -> bool:
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.Binv)):
            return False
        self._recompute_xb()
        return True

    def _recompute_xb(self):
        x = self.x.copy()
        x[self.basis] = 0.0
        self.x[self.basis] = self.Binv @ (self.b - self.A @ x)

    # --------------------------------------------------------------------------- phase
    def run(self, c) -> str:
        """Optimize ``c @ x`` from the current basis; returns a status string."""
        since_refactor = 0
        degenerate = 0
        bland = False
        c_scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        tol_d = self.opt_tol * c_scale
        is_basic = np.zeros(self.n, dtype=bool)
        is_basic[self.basis] = True
        movable = self.hi > self.lo
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            if since_refactor >= self.refactor_every:
                if not self.refactor():
                    return NUMERICAL
                since_refactor = 0
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            x = self.x
            can_up = movable & ~is_basic & (x < self.hi - self.feas_tol)
            can_down = movable & ~is_basic & (x > self.lo + self.feas_tol)
            score = np.where(can_up & (d < -tol_d), -d, 0.0)
            score = np.maximum(score, np.where(can_down & (d > tol_d), d, 0.0))
            candidates = np.flatnonzero(score > 0)
            if candidates.size == 0:
                return OPTIMAL
            q = int(candidates[0]) if bland else int(candidates[np.argmax(score[candidates])])
            direction = 1.0 if (d[q] < 0 and can_up[q]) else -1.0

            alpha = self.Binv @ self.A[:, q]
            g = direction * alpha
            xb = x[self.basis]
            lb, ub = self.lo[self.basis], self.hi[self.basis]
            piv_tol = 1e-9
            ratios = np.full(self.m, np.inf)
            dec = g > piv_tol
            inc = g < -piv_tol
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[dec] = (xb[dec] - lb[dec]) / g[dec]
                ratios[inc] = (ub[inc] - xb[inc]) / (-g[inc])
            ratios = np.where(np.isnan(ratios), np.inf, np.maximum(ratios, 0.0))
            flip = self.hi[q] - self.lo[q]
            theta_row = ratios.min() if self.m else np.inf
            if not np.isfinite(theta_row) and not np.isfinite(flip):
                return UNBOUNDED
            if flip <= theta_row:
                # the entering variable reaches its other bound first
                x[q] = self.hi[q] if direction > 0 else self.lo[q]
                x[self.basis] = xb - flip * g
                self.iterations += 1
                degenerate = 0
                continue
            # Harris-style choice: among near-minimal ratios take the largest pivot
            with np.errstate(invalid="ignore", divide="ignore"):
                relaxed = np.full(self.m, np.inf)
                relaxed[dec] = (xb[dec] - lb[dec] + self.feas_tol) / g[dec]
                relaxed[inc] = (ub[inc] - xb[inc] + self.feas_tol) / (-g[inc])
            bound = np.nanmin(relaxed)
            ties = np.flatnonzero((ratios <= bound) & (dec | inc))
            if bland:
                best = ratios[ties].min()
                ties = ties[ratios[ties] <= best + 1e-12]
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(g[ties]))])
            theta = ratios[r]
            leaving = self.basis[r]
            x[self.basis] = xb - theta * g
            x[q] = x[q] + direction * theta
            x[leaving] = lb[r] if g[r] > 0 else ub[r]
            # eta update of the basis inverse
            piv = alpha[r]
            row = self.Binv[r] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[r] = row
            self.basis[r] = q
            is_basic[leaving] = False
            is_basic[q] = True
            self.iterations += 1
            since_refactor += 1
            if theta <= 1e-12:
                degenerate += 1
                if degenerate >= self.bland_after:
                    bland = True
            else:
                degenerate = 0


    def dual_run(self, c) -> str:
        """Bounded dual simplex from a dual feasible basis.

        Returns ``optimal`` once the basic values respect their bounds,
        ``infeasible`` when a violated row admits no entering column, and
        ``numerical`` when the start is not dual feasible or pivots fail.
        """
        is_basic = np.zeros(self.n, dtype=bool)
        is_basic[self.basis] = True
        c_scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        tol_d = 1e-7 * c_scale
        since_refactor = 0
        limit = self.iterations + self.max_iter
        while True:
            if self.iterations >= limit:
                return ITERATION_LIMIT
            if since_refactor >= self.refactor_every:
                if not self.refactor():
                    return NUMERICAL
                since_refactor = 0
            y = c[self.basis] @ self.Binv
            d = c - y @ self.A
            x = self.x
            nb = ~is_basic & (self.hi > self.lo)
            at_lo = nb & np.isfinite(self.lo) & (x <= self.lo + self.feas_tol)
            at_hi = nb & ~at_lo & np.isfinite(self.hi) & (x >= self.hi - self.feas_tol)
            free = nb & ~at_lo & ~at_hi
            if np.any(at_lo & (d < -tol_d)) or np.any(at_hi & (d > tol_d)) or np.any(free & (np.abs(d) > tol_d)):
                return NUMERICAL
            xb = x[self.basis]
            lb, ub = self.lo[self.basis], self.hi[self.basis]
            with np.errstate(invalid="ignore"):
                below = np.where(lb - xb > self.feas_tol, lb - xb, 0.0)
                above = np.where(xb - ub > self.feas_tol, xb - ub, 0.0)
            viol = np.maximum(below, above)
            if not np.any(viol > 0):
                return OPTIMAL
            r = int(np.argmax(viol))
            to_lower = below[r] > 0
            target = lb[r] if to_lower else ub[r]
            row = self.Binv[r] @ self.A
            piv_tol = 1e-9
            if to_lower:
                elig = (at_lo & (row < -piv_tol)) | (at_hi & (row > piv_tol)) | (free & (np.abs(row) > piv_tol))
            else:
                elig = (at_lo & (row > piv_tol)) | (at_hi & (row < -piv_tol)) | (free & (np.abs(row) > piv_tol))
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                # a violation this small is more likely rounding than a real dual ray
                return INFEASIBLE if viol[r] > 1e-7 * (1.0 + abs(target)) else NUMERICAL
            ratios = np.abs(d[cand]) / np.abs(row[cand])
            best = ratios.min()
            ties = cand[ratios <= best + 1e-12 * max(1.0, best)]
            q = int(ties[np.argmax(np.abs(row[ties]))])
            alpha = self.Binv @ self.A[:, q]
            piv = alpha[r]
            if abs(piv) < piv_tol:
                return NUMERICAL
            delta = (xb[r] - target) / piv
            x[self.basis] = xb - delta * alpha
            x[q] = x[q] + delta
            leaving = self.basis[r]
            x[leaving] = target
            rowb = self.Binv[r] / piv
            self.Binv -= np.outer(alpha, rowb)
            self.Binv[r] = rowb
            self.basis[r] = q
            is_basic[leaving] = False
            is_basic[q] = True
            self.iterations += 1
            since_refactor += 1


def _prepare(form: ArrayForm, lb, ub):
    A = form.A
    m, n = A.shape
    lo_s = np.where(form.sense == ">=", -np.inf, 0.0)
    hi_s = np.where(form.sense == "<=", np.inf, 0.0)
    lo = np.concatenate([lb, lo_s])
    hi = np.concatenate([ub, hi_s])
    full = np.hstack([A, np.eye(m)])
    return full, lo, hi


def _start_values(lo, hi):
    x = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
    return x.astype(float)


@dataclass(frozen=True)
class WarmStart:
    """A basis over the structural and slack columns, reusable after bound changes."""

    basis: np.ndarray
    at_upper: np.ndarray


def solve_lp(model: Union[ModelIR, ArrayForm], lb: Optional[np.ndarray] = None, ub: Optional[np.ndarray] = None,
             *, feas_tol: float = 1e-9, opt_tol: float = 1e-9, max_iter: Optional[int] = None,
             bland_after: int = 1000, refactor_every: int = 50,
             warm_start: Optional[WarmStart] = None) -> LPSolution:
    """Solve the continuous relaxation of ``model`` (integrality is ignored).

    ``lb``/``ub`` override the variable bounds, which is how branch-and-bound
    nodes are expressed. The returned ``duals`` are row multipliers ``y``
    for the minimization form, and ``dual_bound`` is the Lagrangian bound
    ``y @ b + sum(reduced cost * active bound)`` in the model's own sense.

    ``warm_start`` is the :attr:`LPSolution.warm_start` of an earlier solve
    of the same rows with other bounds. Such a basis stays dual feasible,
    so the dual simplex repairs it in a few pivots; if that fails for any
    reason the solve restarts from scratch.
    """
    form = model.to_arrays() if isinstance(model, ModelIR) else model
    lb = form.lb if lb is None else np.asarray(lb, dtype=float)
    ub = form.ub if ub is None else np.asarray(ub, dtype=float)
    sign = -1.0 if form.maximize else 1.0
    m, n = form.A.shape
    if np.any(lb > ub + feas_tol):
        return LPSolution(INFEASIBLE, None, np.nan, message="empty variable bounds")
    if max_iter is None:
        max_iter = 50 * (2 * m + n) + 1000
    args = (feas_tol, opt_tol, max_iter, bland_after, refactor_every)
    if warm_start is not None:
        sx = _warm(form, lb, ub, warm_start, args, sign)
        if isinstance(sx, LPSolution):
            return sx
        if sx is not None:
            result = _finish(form, lb, ub, sx, sign, args)
            if result.status in (OPTIMAL, INFEASIBLE, UNBOUNDED):
                return result
    sx = _cold(form, lb, ub, args)
    if isinstance(sx, LPSolution):
        return sx
    return _finish(form, lb, ub, sx, sign, args)


def _cold(form: ArrayForm, lb, ub, args):
    feas_tol = args[0]
    m, n = form.A.shape
    full, lo, hi = _prepare(form, lb, ub)
    x = _start_values(lo, hi)
    # slacks start basic at b - A x; rows where that violates the slack bounds get an artificial
    slack = form.b - form.A @ x[:n]
    s_val = np.clip(slack, lo[n:], hi[n:])
    gap = slack - s_val
    art_rows = np.flatnonzero(np.abs(gap) > 0)
    n_art = art_rows.size
    if n_art:
        cols = np.zeros((m, n_art))
        cols[art_rows, np.arange(n_art)] = np.sign(gap[art_rows])
        full = np.hstack([full, cols])
        lo = np.concatenate([lo, np.zeros(n_art)])
        hi = np.concatenate([hi, np.full(n_art, np.inf)])
        x = np.concatenate([x, np.abs(gap[art_rows])])
    x[n:n + m] = s_val
    basis = np.arange(n, n + m)
    if n_art:
        basis[art_rows] = n + m + np.arange(n_art)

    sx = _Simplex(full, form.b.astype(float), lo, hi, *args)
    sx.x = x
    sx.basis = basis
    if not sx.refactor():
        return LPSolution(NUMERICAL, None, np.nan, message="singular starting basis")
    if n_art:
        c1 = np.zeros(full.shape[1])
        c1[n + m:] = 1.0
        status = sx.run(c1)
        if status != OPTIMAL:
            return LPSolution(status, None, np.nan, iterations=sx.iterations, message="phase 1")
        sx.refactor()
        infeas = sx.x[n + m:].max()
        scale = 1.0 + np.abs(form.b).max(initial=0.0)
        if infeas > feas_tol * scale * 10:
            return LPSolution(INFEASIBLE, None, np.nan, iterations=sx.iterations,
                              message=f"phase 1 residual {infeas:.3g}")
        sx.hi[n + m:] = 0.0
        nonbasic_art = np.setdiff1d(np.arange(n + m, n + m + n_art), sx.basis)
        sx.x[nonbasic_art] = 0.0
        sx._recompute_xb()
    return sx


def _warm(form: ArrayForm, lb, ub, warm: WarmStart, args, sign):
    """Dual simplex from a previous basis; ``None`` asks for a cold start."""
    m, n = form.A.shape
    if warm.basis.shape != (m,) or warm.at_upper.shape != (n + m,):
        return None
    full, lo, hi = _prepare(form, lb, ub)
    x = np.where(warm.at_upper, hi, lo)
    x = np.where(np.isfinite(x), x, np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0)))
    sx = _Simplex(full, form.b.astype(float), lo, hi, *args)
    sx.x = x.astype(float)
    sx.basis = warm.basis.copy()
    if not sx.refactor():
        return None
    c = np.zeros(n + m)
    c[:n] = sign * form.c
    status = sx.dual_run(c)
    if status == INFEASIBLE:
        return LPSolution(INFEASIBLE, None, np.nan, iterations=sx.iterations, message="dual ray")
    return sx if status == OPTIMAL else None


def _finish(form: ArrayForm, lb, ub, sx: _Simplex, sign, args) -> LPSolution:
    feas_tol, opt_tol = args[0], args[1]
    m, n = form.A.shape
    full = sx.A
    c2 = np.zeros(full.shape[1])
    c2[:n] = sign * form.c
    for attempt in range(3):
        status = sx.run(c2)
        if status != OPTIMAL:
            return LPSolution(status, None, np.nan, iterations=sx.iterations)
        if not sx.refactor():
            return LPSolution(NUMERICAL, None, np.nan, iterations=sx.iterations, message="singular final basis")
        primal_ok = _primal_ok(sx, full, feas_tol * 100)
        y = c2[sx.basis] @ sx.Binv
        d = c2 - y @ full
        if primal_ok and _dual_ok(sx, d, opt_tol * 100):
            break
    else:
        return LPSolution(NUMERICAL, None, np.nan, iterations=sx.iterations,
                          message="could not certify the final basis")

    xs = sx.x[:n].copy()
    # snap tiny bound violations left by floating point
    xs = np.clip(xs, lb, ub)
    objective = float(form.c @ xs + form.c0)
    dual_bound = _lagrangian_bound(form.b, y, d, sx.lo, sx.hi, opt_tol)
    warm = None
    if np.all(sx.basis < n + m):
        is_basic = np.zeros(n + m, dtype=bool)
        is_basic[sx.basis] = True
        hi = sx.hi[:n + m]
        at_upper = ~is_basic & np.isfinite(hi) & (sx.x[:n + m] >= hi - feas_tol) & (sx.hi[:n + m] > sx.lo[:n + m])
        warm = WarmStart(sx.basis.copy(), at_upper)
    return LPSolution(
        OPTIMAL, xs, objective,
        duals=sign * y, reduced_costs=sign * d[:n],
        dual_bound=sign * dual_bound + form.c0,
        iterations=sx.iterations,
        warm_start=warm,
    )


def _primal_ok(sx: _Simplex, full, tol) -> bool:
    x = sx.x
    resid = np.abs(full @ x - sx.b).max(initial=0.0)
    scale = 1.0 + np.abs(x).max(initial=0.0)
    bound_viol = max(np.max(sx.lo - x, initial=0.0), np.max(x - sx.hi, initial=0.0))
    return resid <= tol * scale and bound_viol <= tol * scale


def _dual_ok(sx: _Simplex, d, tol) -> bool:
    is_basic = np.zeros(sx.n, dtype=bool)
    is_basic[sx.basis] = True
    nb = ~is_basic & (sx.hi > sx.lo)
    x = sx.x
    scale = max(1.0, float(np.abs(d).max(initial=0.0)))
    with np.errstate(invalid="ignore"):
        at_lo = nb & np.isfinite(sx.lo) & (x <= sx.lo + 1e-9 * (1 + np.abs(sx.lo)))
        at_hi = nb & np.isfinite(sx.hi) & (x >= sx.hi - 1e-9 * (1 + np.abs(sx.hi)))
    free = nb & ~at_lo & ~at_hi
    bad = (at_lo & ~at_hi & (d < -tol * scale)) | (at_hi & ~at_lo & (d > tol * scale)) | (free & (np.abs(d) > tol * scale))
    return not bad.any()


def _lagrangian_bound(b, y, d, lo, hi, tol: float) -> float:
    # min c x  >=  y b + sum_j d_j * (lo_j if d_j > 0 else hi_j)
    # reduced costs within the optimality tolerance count as zero, matching
    # the certificate, so rounding noise on an unbounded column gives no -inf
    bound = float(y @ b)
    d = np.where(np.abs(d) <= tol * max(1.0, float(np.abs(d).max(initial=0.0))), 0.0, d)
    pos = d > 0
    neg = d < 0
    with np.errstate(invalid="ignore"):
        terms = np.where(pos, d * lo, np.where(neg, d * hi, 0.0))
    if np.any(~np.isfinite(terms)):
        return -np.inf
    return bound + float(terms.sum())
