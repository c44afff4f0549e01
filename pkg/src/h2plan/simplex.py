"""Dense bounded-variable primal simplex.

Solves ``min c.x  s.t.  row_lo <= A x <= row_hi,  lb <= x <= ub`` with a
revised simplex on an explicit basis inverse. Every row receives a logical
column ``s = A x`` carrying the row bounds, and phase 1 drives a set of
artificial columns to zero.

Pricing is Dantzig (largest reduced cost, lowest index on ties); after a run
of degenerate pivots it switches to Bland's rule (lowest eligible index, lowest
basic index among ratio ties) until the objective moves again, which rules out
cycling. No randomisation is involved, so identical inputs give bit-identical
outputs on one platform.
"""

from __future__ import annotations

import numpy as np

from .errors import SolverFailure

PIVOT_TOL = 1e-9
OPT_TOL = 1e-9
FEAS_TOL = 1e-7
REFACTOR_EVERY = 64
BLAND_AFTER = 20


def _initial_point(lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    x = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
    return x.astype(float)


class _Tableau:
    def __init__(self, M, lb, ub, x, basis):
        self.M = M
        self.lb = lb
        self.ub = ub
        self.x = x
        self.basis = basis
        self.m = M.shape[0]
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.refactor()

    def refactor(self):
        B = self.M[:, self.basis]
        self.Binv = np.linalg.inv(B)
        nonbasic = ~self.is_basic
        rhs = -self.M[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = self.Binv @ rhs

    def run(self, c: np.ndarray, max_iter: int) -> tuple[str, int]:
        M, lb, ub, x = self.M, self.lb, self.ub, self.x
        fixed = lb == ub
        degenerate_run = 0
        since_refactor = 0
        for it in range(max_iter):
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
            y = c[self.basis] @ self.Binv
            d = c - y @ M
            d[self.is_basic] = 0.0
            d[fixed & ~self.is_basic] = 0.0
            at_lb = np.isclose(x, lb, rtol=0.0, atol=FEAS_TOL) & np.isfinite(lb)
            at_ub = np.isclose(x, ub, rtol=0.0, atol=FEAS_TOL) & np.isfinite(ub)
            can_inc = ~self.is_basic & ~fixed & ~at_ub & (d < -OPT_TOL)
            can_dec = ~self.is_basic & ~fixed & ~at_lb & (d > OPT_TOL)
            eligible = can_inc | can_dec
            if not eligible.any():
                return "optimal", it
            if degenerate_run >= BLAND_AFTER:
                j = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                j = int(np.argmax(score))  # argmax returns the lowest index on ties
            direction = 1.0 if can_inc[j] else -1.0

            alpha = self.Binv @ M[:, j]
            delta = -direction * alpha  # rate of change of the basic variables
            xb = x[self.basis]
            lbb = lb[self.basis]
            ubb = ub[self.basis]
            limits = np.full(self.m, np.inf)
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            limits[dec] = np.maximum(xb[dec] - lbb[dec], 0.0) / -delta[dec]
            limits[inc] = np.maximum(ubb[inc] - xb[inc], 0.0) / delta[inc]
            t_rows = limits.min() if self.m else np.inf
            t_flip = ub[j] - lb[j]
            if not np.isfinite(t_rows) and not np.isfinite(t_flip):
                return "unbounded", it
            if t_flip <= t_rows:
                x[self.basis] = xb + t_flip * delta
                x[j] = ub[j] if direction > 0 else lb[j]
                degenerate_run = 0
                continue
            t = t_rows
            ties = np.flatnonzero(limits <= t + 1e-12 * max(1.0, abs(t)))
            if degenerate_run >= BLAND_AFTER:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                # largest pivot among ties for stability; lowest basic index after that
                piv = np.abs(alpha[ties])
                best = ties[piv >= piv.max() * (1.0 - 1e-12)]
                r = int(best[np.argmin(self.basis[best])])
            leaving = self.basis[r]
            x[self.basis] = xb + t * delta
            x[j] = x[j] + direction * t
            x[leaving] = lb[leaving] if delta[r] < 0 else ub[leaving]
            degenerate_run = degenerate_run + 1 if t <= 1e-12 else 0

            # eta update of the explicit inverse
            pivot = alpha[r]
            row_r = self.Binv[r] / pivot
            self.Binv -= np.outer(alpha, row_r)
            self.Binv[r] = row_r
            self.basis[r] = j
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            since_refactor += 1
        return "iteration_limit", max_iter


def bounded_simplex(c, A, row_lo, row_hi, lb, ub, max_iter: int | None = None):
    """Return ``(status, x, iterations)``; status is optimal/infeasible/unbounded."""
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape if A.size else (len(row_lo), len(c))
    row_lo = np.asarray(row_lo, dtype=float)
    row_hi = np.asarray(row_hi, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if A.size == 0:
        A = np.zeros((m, n))
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000

    # columns: structural (n) | logical s = A x (m) | artificial (m)
    x = np.concatenate([_initial_point(lb, ub), _initial_point(row_lo, row_hi), np.zeros(m)])
    residual = -(A @ x[:n] - x[n:n + m])
    sign = np.where(residual >= 0, 1.0, -1.0)
    M = np.hstack([A, -np.eye(m), np.diag(sign)])
    x[n + m:] = np.abs(residual)
    big_lb = np.concatenate([lb, row_lo, np.zeros(m)])
    big_ub = np.concatenate([ub, row_hi, np.full(m, np.inf)])
    basis = np.arange(n + m, n + 2 * m)

    tab = _Tableau(M, big_lb, big_ub, x, basis)
    iters = 0
    if m:
        c1 = np.concatenate([np.zeros(n + m), np.ones(m)])
        status, it = tab.run(c1, max_iter)
        iters += it
        if status == "iteration_limit":
            raise SolverFailure("native simplex: iteration limit in phase 1")
        tab.refactor()
        finite_rhs = np.concatenate([row_lo, row_hi])
        scale = max(1.0, float(np.abs(finite_rhs[np.isfinite(finite_rhs)]).max(initial=0.0)))
        if tab.x[n + m:].sum() > FEAS_TOL * scale:
            return "infeasible", None, iters
        # artificials stay in the basis only at zero level from here on
        tab.ub[n + m:] = 0.0

    c2 = np.concatenate([c, np.zeros(2 * m)])
    status, it = tab.run(c2, max_iter)
    iters += it
    if status == "iteration_limit":
        raise SolverFailure("native simplex: iteration limit in phase 2")
    if status == "unbounded":
        return "unbounded", None, iters
    tab.refactor()
    return "optimal", tab.x[:n].copy(), iters
