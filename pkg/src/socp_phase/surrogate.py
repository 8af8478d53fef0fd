"""Per-draw solvers for the random scalar programs whose optima concentrate
at the constrained-l1 program's shifted objective.

General form, over nu >= 0 and a box-constrained multiplier vector:

    max  sigma*sqrt(||g||^2 nu^2 - ||nu*h_bar - 1 + lam||^2)
         - x_mag * sum(lam over the sparse block) - nu*r

with lam in [0,1] on the zero block and [0,2] on the sparse block; the
signed variant replaces the box by lam >= 0 and uses the plain-sorted
rearrangement. The maximizer has a breakpoint structure: given nu and the
scalar u = -x_mag*sqrt(E)/sigma, every lam coordinate is a clipped affine
function of its h_bar entry, so block sums are prefix-sum lookups after
one sort.

The objective is jointly concave, so its nu-marginal is concave and the
solver is an outer bisection on the sign of d(objective)/d(nu), with an
inner bisection for the self-consistent u at each nu. Both loops are
safeguarded and cannot leave their brackets; no iteration can diverge on a
bounded instance. Unboundedness of the signed program is decided exactly
beforehand from the recession (ray) problem, whose own breakpoint structure
is enumerable in O(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .instances import SurrogateDraw
from .numerics import ConvergenceError


@dataclass(frozen=True)
class SurrogateSolution:
    nu: float
    lam: np.ndarray
    xi: float
    w_norm: float
    c1: int
    c2: int
    c3: Optional[int]  # None for the signed variant
    status: str  # "Bounded" | "Unbounded"


@dataclass(frozen=True)
class RayResult:
    status: str  # "Bounded" | "Unbounded"
    value: float  # concentrating recession value; unbounded iff > 0


class _BlockSums:
    """Prefix sums over the sorted blocks of one draw."""

    def __init__(self, hbar: np.ndarray, g: np.ndarray, k: int):
        self.n = hbar.size
        self.k = k
        self.nk = self.n - k
        self.zb = hbar[: self.nk]  # ascending
        self.sp = hbar[self.nk:]  # descending
        self.sp_asc = self.sp[::-1].copy()
        self.gg = float(g @ g)
        self.czb2 = np.concatenate([[0.0], np.cumsum(self.zb**2)])
        self.czb1 = np.concatenate([[0.0], np.cumsum(self.zb)])
        self.csp2 = np.concatenate([[0.0], np.cumsum(self.sp**2)])
        self.csp1 = np.concatenate([[0.0], np.cumsum(self.sp)])

    def c1_of(self, nu: float) -> int:
        # zero-block entries with nu*h < 1 keep an interior multiplier
        return int(np.searchsorted(self.zb, 1.0 / nu, side="left"))

    def head_count(self, nu: float, u: float) -> int:
        # sparse entries with u + 1 - nu*h <= 0 sit at the lower bound
        j = self.k - int(np.searchsorted(self.sp_asc, (1.0 + u) / nu, side="left"))
        return min(max(j, 0), self.k)

    def tail_count(self, nu: float, u: float, cap: float) -> int:
        # sparse entries with u + 1 - nu*h >= cap sit at the upper bound
        c = int(np.searchsorted(self.sp_asc, (u - (cap - 1.0)) / nu, side="right"))
        return min(max(c, 0), self.k)


def _stats_general(B: _BlockSums, nu: float, u: float, sigma: float, x: float):
    c1 = B.c1_of(nu)
    j0 = B.head_count(nu, u)
    c3 = min(B.tail_count(nu, u, 2.0), B.k - j0)
    mid = B.k - j0 - c3
    d = (B.czb2[B.nk] - B.czb2[c1]) + B.csp2[j0] + (B.csp2[B.k] - B.csp2[B.k - c3])
    s = (B.czb1[B.nk] - B.czb1[c1]) + B.csp1[j0] - (B.csp1[B.k] - B.csp1[B.k - c3])
    mid_sum = B.csp1[B.k - c3] - B.csp1[j0]
    cnt = (B.nk - c1 + j0) + c3
    sig2 = sigma * sigma + mid * x * x
    return c1, j0, c3, d, s, mid_sum, cnt, sig2


def _stats_signed(B: _BlockSums, nu: float, u: float, sigma: float, x: float):
    c1 = B.c1_of(nu)
    j0 = B.head_count(nu, u)
    tail = B.k - j0
    d = (B.czb2[B.nk] - B.czb2[c1]) + B.csp2[j0]
    s = (B.czb1[B.nk] - B.czb1[c1]) + B.csp1[j0]
    tail_sum = B.csp1[B.k] - B.csp1[j0]
    cnt = B.nk - c1 + j0
    sig2 = sigma * sigma + tail * x * x
    return c1, j0, d, s, tail_sum, cnt, sig2


def _inner_u(B: _BlockSums, nu: float, sigma: float, x: float, stats) -> float:
    """Self-consistent u = -x*sqrt(E0)/sigma' at this nu (u in [lo, 0])."""
    if x == 0.0:
        return 0.0

    def miss(u: float) -> float:
        st = stats(B, nu, u, sigma, x)
        d, s, cnt, sig2 = st[-5], st[-4], st[-2], st[-1]
        e0 = B.gg * nu * nu - nu * nu * d + 2.0 * nu * s - cnt
        return u + x * math.sqrt(max(e0, 0.0)) / math.sqrt(sig2)

    if miss(0.0) <= 0.0:
        return 0.0
    lo = -x * math.sqrt(B.gg) * nu / sigma - 1.0
    hi = 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if miss(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-14 * (1.0 + abs(lo)):
            break
    return 0.5 * (lo + hi)


def _slope(B: _BlockSums, nu: float, sigma: float, x: float, r: float, stats) -> float:
    """d(objective)/d(nu) at the inner-consistent multiplier block structure."""
    u = _inner_u(B, nu, sigma, x, stats)
    st = stats(B, nu, u, sigma, x)
    d, s, blocksum, cnt, sig2 = st[-5], st[-4], st[-3], st[-2], st[-1]
    e0 = B.gg * nu * nu - nu * nu * d + 2.0 * nu * s - cnt
    if e0 <= 0.0:
        return math.inf  # below the domain: objective still rising in nu
    return math.sqrt(sig2) * (nu * (B.gg - d) + s) / math.sqrt(e0) - (r - x * blocksum)


def _maximize_nu(B: _BlockSums, sigma: float, x: float, r: float, stats) -> tuple[float, float]:
    """Concave maximization over nu by bisection on the slope sign."""
    lo = 1e-9
    if not (_slope(B, lo, sigma, x, r, stats) > 0.0):
        nu = lo
    else:
        hi = 1.0
        expanded = False
        for _ in range(60):
            if _slope(B, hi, sigma, x, r, stats) <= 0.0:
                expanded = True
                break
            hi *= 2.0
        if not expanded:
            raise ConvergenceError("no stationary nu found (objective keeps rising)", hi, math.inf)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _slope(B, mid, sigma, x, r, stats) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * max(1.0, hi):
                break
        nu = 0.5 * (lo + hi)
    return nu, _inner_u(B, nu, sigma, x, stats)


def _assemble_general(B: _BlockSums, nu: float, u: float, sigma: float, x: float, r: float):
    lam = np.empty(B.n)
    lam[: B.nk] = np.clip(1.0 - nu * B.zb, 0.0, 1.0)
    lam[B.nk:] = np.clip(u + 1.0 - nu * B.sp, 0.0, 2.0)
    hbar = np.concatenate([B.zb, B.sp])
    v = nu * hbar - 1.0 + lam
    e = B.gg * nu * nu - float(v @ v)
    xi = sigma * math.sqrt(max(e, 0.0)) - x * float(lam[B.nk:].sum()) - nu * r
    w = sigma * float(np.linalg.norm(v)) / math.sqrt(max(e, 1e-300))
    return lam, xi, w


def solve_surrogate_general(
    draw: SurrogateDraw, sigma: float, x_mag: float, r: float
) -> SurrogateSolution:
    """Maximizer of the general (box-multiplier) scalar program for one draw."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    B = _BlockSums(draw.h_bar, draw.g, draw.k)
    nu, u = _maximize_nu(B, sigma, x_mag, r, _stats_general)
    lam, xi, w = _assemble_general(B, nu, u, sigma, x_mag, r)
    c1, j0, c3, *_ = _stats_general(B, nu, u, sigma, x_mag)
    return SurrogateSolution(nu, lam, xi, w, c1, B.nk + j0, c3, "Bounded")


def solve_surrogate_signed(
    draw: SurrogateDraw, sigma: float, x_mag: float, r: float
) -> SurrogateSolution:
    """Maximizer of the signed (nonnegative-multiplier) scalar program.

    Detects unboundedness from the recession problem first; an unbounded
    draw is returned with status "Unbounded" and NaN optimum fields.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    ray = detect_unbounded(draw, sigma, x_mag, r)
    B = _BlockSums(draw.h_bar_plus, draw.g, draw.k)
    if ray.status == "Unbounded":
        nan = math.nan
        return SurrogateSolution(nan, np.full(B.n, nan), nan, nan, -1, -1, None, "Unbounded")
    nu, u = _maximize_nu(B, sigma, x_mag, r, _stats_signed)
    lam = np.empty(B.n)
    lam[: B.nk] = np.maximum(1.0 - nu * B.zb, 0.0)
    lam[B.nk:] = np.maximum(u + 1.0 - nu * B.sp, 0.0)
    hbar = np.concatenate([B.zb, B.sp])
    v = nu * hbar - 1.0 + lam
    e = B.gg * nu * nu - float(v @ v)
    xi = sigma * math.sqrt(max(e, 0.0)) - x_mag * float(lam[B.nk:].sum()) - nu * r
    w = sigma * float(np.linalg.norm(v)) / math.sqrt(max(e, 1e-300))
    c1, j0, *_ = _stats_signed(B, nu, u, sigma, x_mag)
    return SurrogateSolution(nu, lam, xi, w, c1, B.nk + j0, None, "Bounded")


def closed_form_general(
    draw: SurrogateDraw, sol: SurrogateSolution, sigma: float, x_mag: float, r: float
) -> tuple[float, float]:
    """(xi, w_norm) reassembled from the integer breakpoints alone."""
    B = _BlockSums(draw.h_bar, draw.g, draw.k)
    c1, c2, c3 = sol.c1, sol.c2, sol.c3
    j0 = c2 - B.nk
    nu = sol.nu
    d = (B.czb2[B.nk] - B.czb2[c1]) + B.csp2[j0] + (B.csp2[B.k] - B.csp2[B.k - c3])
    s = (B.czb1[B.nk] - B.czb1[c1]) + B.csp1[j0] - (B.csp1[B.k] - B.csp1[B.k - c3])
    mid_sum = B.csp1[B.k - c3] - B.csp1[j0]
    cnt = (B.nk - c1 + j0) + c3
    mid = B.k - j0 - c3
    sig2 = sigma * sigma + mid * x_mag * x_mag
    e0 = B.gg * nu * nu - nu * nu * d + 2.0 * nu * s - cnt
    xi = math.sqrt(sig2 * max(e0, 0.0)) - nu * (r - x_mag * mid_sum) - x_mag * mid - 2.0 * c3 * x_mag
    w_num = B.gg * nu * nu * mid * x_mag * x_mag / (sigma * sigma) + nu * nu * d - 2.0 * nu * s + cnt
    w = sigma * math.sqrt(max(w_num, 0.0)) / math.sqrt(max(e0, 1e-300))
    return xi, w


def closed_form_signed(
    draw: SurrogateDraw, sol: SurrogateSolution, sigma: float, x_mag: float, r: float
) -> tuple[float, float]:
    """Signed-variant reassembly of (xi, w_norm) from the breakpoints."""
    B = _BlockSums(draw.h_bar_plus, draw.g, draw.k)
    c1, c2 = sol.c1, sol.c2
    j0 = c2 - B.nk
    nu = sol.nu
    d = (B.czb2[B.nk] - B.czb2[c1]) + B.csp2[j0]
    s = (B.czb1[B.nk] - B.czb1[c1]) + B.csp1[j0]
    tail_sum = B.csp1[B.k] - B.csp1[j0]
    cnt = B.nk - c1 + j0
    tail = B.k - j0
    sig2 = sigma * sigma + tail * x_mag * x_mag
    e0 = B.gg * nu * nu - nu * nu * d + 2.0 * nu * s - cnt
    xi = math.sqrt(sig2 * max(e0, 0.0)) - nu * (r - x_mag * tail_sum) - x_mag * tail
    w_num = B.gg * nu * nu * tail * x_mag * x_mag / (sigma * sigma) + nu * nu * d - 2.0 * nu * s + cnt
    w = sigma * math.sqrt(max(w_num, 0.0)) / math.sqrt(max(e0, 1e-300))
    return xi, w


def detect_unbounded(
    draw: SurrogateDraw, sigma: float, x_mag: float, r: float
) -> RayResult:
    """Exact recession analysis of the signed program.

    Maximizes sigma*sqrt(||g||^2 - ||h_bar_plus + lam||^2) - x_mag*sum(lam
    over the sparse block) - r over lam >= 0 by enumerating the tail-count
    breakpoint; the program is unbounded iff the maximum is positive.
    """
    B = _BlockSums(draw.h_bar_plus, draw.g, draw.k)
    c1f = int(np.searchsorted(B.zb, 0.0, side="right"))
    d0 = B.czb2[B.nk] - B.czb2[c1f]
    best = -math.inf
    for j in range(B.k + 1):  # j sparse coordinates carry an interior multiplier
        dj = d0 + B.csp2[B.k - j]
        gap = B.gg - dj
        if gap < 0.0:
            continue
        sig2 = sigma * sigma + j * x_mag * x_mag
        uf = -x_mag * math.sqrt(gap) / math.sqrt(sig2)
        ok_tail = j == 0 or B.sp_asc[j - 1] <= uf
        ok_head = j == B.k or B.sp_asc[j] >= uf
        if not (ok_tail and ok_head):
            continue
        tail_sum = B.csp1[B.k] - B.csp1[B.k - j]
        val = math.sqrt(sig2) * math.sqrt(gap) - (r - x_mag * tail_sum)
        best = max(best, val)
    if best == -math.inf:
        # recession set empty or no stationary point above the domain floor
        best = -r
    return RayResult("Unbounded" if best > 0.0 else "Bounded", best)
