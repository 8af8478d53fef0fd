"""Numerical solvers for the norm-ball-constrained l1 programs.

    minimize ||x||_1  subject to  ||y - A x||_2 <= r          (general)
    minimize ||x||_1  subject to  ||y - A x||_2 <= r, x >= 0  (signed)

Solved by operator splitting (over-relaxed ADMM / Douglas-Rachford) between
the l1 prox (soft threshold, one-sided for the signed variant) and the exact
projection onto {x : ||Ax - y|| <= r}. The projection costs one thin SVD per
instance plus a scalar secular-equation bisection per iterate, so every
iterate is feasible and the per-iteration work is two skinny matrix products.

Optimality is certified by a duality gap: dual candidates are built from the
constraint-residual direction and, periodically, from a least-squares fit on
the current support; p = 0 is always dual feasible, so the certified dual
value is floored at zero. The signed problem is first screened for
feasibility with a projected-gradient (FISTA) nonnegative least-squares
phase; min-distance above r*(1+1e-6) is declared Infeasible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .instances import Instance
from .numerics import ConvergenceError


@dataclass(frozen=True)
class SocpSolution:
    x_hat: np.ndarray
    f_obj: float
    w_norm: float
    status: str  # "Optimal" | "Infeasible"
    gap: float
    iterations: int


class BallProjector:
    """Exact Euclidean projection onto {x : ||A x - y||_2 <= r}."""

    def __init__(self, A: np.ndarray, y: np.ndarray, r: float):
        self.A, self.y, self.r = A, y, r
        U, sv, Vt = np.linalg.svd(A, full_matrices=False)
        self.sv = sv
        self.Vt = Vt
        self.b = U.T @ y
        # component of y outside range(A) contributes a fixed residual;
        # computed in vector form to avoid cancellation when y is in range
        perp = y - U @ self.b
        self.res_perp_sq = float(perp @ perp)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        c = self.Vt @ v
        resid2 = (self.sv * c - self.b) ** 2
        base = float(resid2.sum()) + self.res_perp_sq
        if base <= self.r * self.r:
            return v
        if self.res_perp_sq >= self.r * self.r:
            raise ConvergenceError("ball constraint unreachable: r below dist(y, range A)",
                                   v, math.sqrt(self.res_perp_sq))
        target = self.r * self.r - self.res_perp_sq
        s2 = self.sv**2

        def f(mu: float) -> float:
            return float(np.sum(resid2 / (1.0 + mu * s2) ** 2)) - target

        lo, hi = 0.0, 1.0
        while f(hi) > 0.0:
            hi *= 4.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if f(mid) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * hi:
                break
        mu = 0.5 * (lo + hi)
        w = (c + mu * self.sv * self.b) / (1.0 + mu * s2)
        return v + self.Vt.T @ (w - c)


def _soft(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _dual_value(A, y, r, p, nonneg: bool) -> float:
    """Value of a dual candidate scaled onto its feasibility boundary.

    The dual objective y'p - r||p|| is positively homogeneous, so the best
    feasible multiple of p sits where the constraint (||A'p||_inf <= 1, or
    A'p <= 1 for the signed problem) becomes active.
    """
    Atp = A.T @ p
    s = float(np.max(Atp)) if nonneg else float(np.linalg.norm(Atp, np.inf))
    val = float(y @ p - r * np.linalg.norm(p))
    if s > 1e-300:
        return val / s
    return min(val, 0.0)


def _support_dual(A, y, r, z, nonneg: bool, rel_thresh: float = 1e-9) -> float:
    """Dual candidate from a least-squares fit of the support optimality
    conditions, with augmentation rounds that pin slightly-violating
    off-support coordinates; tightens the certificate when r is small."""
    m = A.shape[0]
    supp = np.flatnonzero(np.abs(z) > rel_thresh * max(1.0, float(np.max(np.abs(z)))))
    if supp.size == 0 or supp.size > m:
        return 0.0
    signs = np.sign(z[supp])
    if nonneg:
        signs = np.ones(supp.size)
    best = 0.0
    for _ in range(60):  # cutting-plane rounds on the box constraint
        p, *_ = np.linalg.lstsq(A[:, supp].T, signs, rcond=None)
        best = max(best, _dual_value(A, y, r, p, nonneg))
        dual = A.T @ p
        excess = dual.copy() if nonneg else np.abs(dual)
        excess[supp] = -np.inf
        cand = int(np.argmax(excess))
        if excess[cand] <= 1.0 + 1e-12 or supp.size >= m:
            break
        supp = np.append(supp, cand)
        signs = np.append(signs, 1.0 if nonneg else np.sign(dual[cand]))
    return best


def _admm(A, y, r, tol, max_iter, nonneg):
    m, n = A.shape
    proj = BallProjector(A, y, r)
    x = proj(np.zeros(n))
    t_pen = max(1e-8, float(np.mean(np.abs(x))))
    z = x.copy()
    u = np.zeros(n)
    relax = 1.7
    best_dual = 0.0
    gap = math.inf
    for it in range(1, max_iter + 1):
        x = proj(z - u)
        xr = relax * x + (1.0 - relax) * z
        z_old = z
        v = xr + u
        z = np.maximum(v - t_pen, 0.0) if nonneg else _soft(v, t_pen)
        u += xr - z
        if it % 25 == 0:
            sc = max(1.0, float(np.linalg.norm(x)))
            prim_res = float(np.linalg.norm(x - z))
            dual_res = float(np.linalg.norm(z - z_old)) / t_pen
            res = A @ x - y
            best_dual = max(best_dual, _dual_value(A, y, r, -res, nonneg), 0.0)
            if it % 250 == 0:
                best_dual = max(best_dual, _support_dual(A, y, r, z, nonneg))
                # the soft-thresholded iterate can miss grazing support
                # entries; the projected iterate keeps them
                best_dual = max(best_dual, _support_dual(A, y, r, x, nonneg, 1e-5))
            prim = float(np.abs(x).sum())
            gap = prim - best_dual
            if prim_res <= tol * sc and dual_res <= tol * sc and gap <= tol * (1.0 + prim):
                return x, gap, it
            if it % 100 == 0:  # residual balancing
                if prim_res > 10.0 * dual_res:
                    u *= 0.5
                    t_pen *= 0.5
                elif dual_res > 10.0 * prim_res:
                    u *= 2.0
                    t_pen *= 2.0
    # final attempt at a tight certificate before giving up
    best_dual = max(best_dual, _support_dual(A, y, r, z, nonneg))
    for thr in (1e-4, 1e-5, 1e-7):
        best_dual = max(best_dual, _support_dual(A, y, r, x, nonneg, thr))
    gap = float(np.abs(x).sum()) - best_dual
    if gap <= 10.0 * tol * (1.0 + float(np.abs(x).sum())):
        return x, gap, max_iter
    raise ConvergenceError("splitting iteration cap reached", x, gap)


def solve_socp(instance: Instance, r: float, tol: float = 1e-6,
               max_iter: int = 50000) -> SocpSolution:
    """General solver; always feasible for r > 0 since m < n with full-rank A."""
    if r <= 0.0:
        raise ValueError("r must be positive")
    x, gap, it = _admm(instance.A, instance.y, r, tol, max_iter, nonneg=False)
    f_obj = float(np.abs(x).sum() - np.abs(instance.x_tilde).sum())
    w = float(np.linalg.norm(x - instance.x_tilde))
    return SocpSolution(x, f_obj, w, "Optimal", gap, it)


def min_residual_nonneg(A: np.ndarray, y: np.ndarray, tol: float = 1e-8,
                        max_iter: int = 20000, stop_below: float | None = None):
    """min ||Ax - y||_2 over x >= 0 by FISTA with projection; returns (x, dist).

    stop_below allows an early exit once the distance certifies feasibility.
    """
    L = float(np.linalg.norm(A, 2)) ** 2
    x0, *_ = np.linalg.lstsq(A, y, rcond=None)
    x = np.maximum(x0, 0.0)
    zv = x.copy()
    tk = 1.0
    for it in range(1, max_iter + 1):
        g = A.T @ (A @ zv - y)
        xn = np.maximum(zv - g / L, 0.0)
        tn = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * tk * tk))
        zv = xn + ((tk - 1.0) / tn) * (xn - x)
        x, tk = xn, tn
        if it % 50 == 0:
            dist = float(np.linalg.norm(A @ x - y))
            if stop_below is not None and dist <= stop_below:
                return x, dist
            pg = float(np.linalg.norm(x - np.maximum(x - A.T @ (A @ x - y) / L, 0.0)))
            if pg <= tol * max(1.0, float(np.linalg.norm(x))):
                return x, dist
    return x, float(np.linalg.norm(A @ x - y))


def solve_socp_signed(instance: Instance, r: float, tol: float = 1e-6,
                      max_iter: int = 50000) -> SocpSolution:
    """Signed solver; Infeasible when no x >= 0 satisfies the ball constraint."""
    if r <= 0.0:
        raise ValueError("r must be positive")
    x1, dist = min_residual_nonneg(instance.A, instance.y, stop_below=r * (1.0 - 1e-9))
    if dist > r * (1.0 + 1e-6):
        nan = math.nan
        return SocpSolution(x1, nan, nan, "Infeasible", nan, 0)
    x, gap, it = _admm(instance.A, instance.y, r, tol, max_iter, nonneg=True)
    f_obj = float(np.abs(x).sum() - np.abs(instance.x_tilde).sum())
    w = float(np.linalg.norm(x - instance.x_tilde))
    return SocpSolution(x, f_obj, w, "Optimal", gap, it)
