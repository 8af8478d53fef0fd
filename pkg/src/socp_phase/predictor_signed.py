"""Problem-dependent performance prediction, sign-aware (nonnegative) case.

Same structure as the sign-unknown predictor but with two block fractions,
plus the feasibility analysis: the nonnegative program stops being feasible
(equivalently, the scalar program stops being bounded) below a critical
x_mag_sc whenever alpha > 0.5 and the radius is small enough. The breaking
point solves a nested scalar system: theta1_feas = (1+beta+)/2 exactly,
theta2_feas(x) from a bracketed quantile equation, and the boundary margin
rooted in x.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

from .numerics import Bracket, SolverSettings, erfinv, find_root
from .order_stats import ThetaSigned, signed_limits
from .predictor import (
    ConfigurationError,
    ModelConfig,
    NoSolutionError,
    ScalarFunctions,
    solution_residual,
    solve_two_unknowns,
)

log = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_BIG = 1e30


class InfeasibleConfigError(RuntimeError):
    """x_mag_sc lies below the feasibility breaking point."""


@dataclass(frozen=True)
class SignedPrediction:
    theta_hat: Optional[ThetaSigned]
    E_nu: float
    E_w_over_sigma: float
    E_xi_per_sqrt_n: float
    residual: float
    feasible: bool


@dataclass(frozen=True)
class FeasibilityPoint:
    x_break_sc: float
    theta2_feas: float
    theta1_feas: float


def scalar_functions_signed(theta: ThetaSigned, cfg: ModelConfig) -> ScalarFunctions:
    bw = cfg.beta_w
    lim = signed_limits(theta, bw)
    S = lim.s_zero + lim.s_upper
    D = lim.normsq_zero + lim.normsq_upper
    R = cfg.r_sc - cfg.x_mag_sc * lim.s_tail
    if R <= 0.0:
        raise ConfigurationError(f"R={R:.6g} <= 0 in the signed scalar functions")
    tail = 1.0 - theta.theta2p
    sig_eff = math.sqrt(cfg.sigma**2 + tail * cfg.x_mag_sc**2)
    A = sig_eff * (cfg.alpha - D) / R
    B = sig_eff * S / R
    quad = A * A - cfg.alpha + D
    csum = theta.theta1p + theta.theta2p - 1.0
    disc = (A * B - S) ** 2 - (B * B + csum) * quad
    if disc < 0.0:
        raise NoSolutionError(f"negative discriminant {disc:.3e} in the nu quadratic")
    if quad == 0.0:
        raise NoSolutionError("degenerate nu quadratic (zero leading coefficient)")
    N = (-(A * B - S) - math.sqrt(disc)) / quad
    return ScalarFunctions(S, D, R, A, B, N)


def _theta_from_nt(N: float, t: float, bw: float) -> ThetaSigned:
    # erfc forms keep the small block fractions relatively accurate
    th1 = bw + 0.5 * (1.0 - bw) * math.erfc(1.0 / (_SQRT2 * N))
    z2 = (1.0 - t) / (_SQRT2 * N)
    if z2 >= 0.0:
        th2 = 1.0 - bw + 0.5 * bw * math.erfc(z2)
    else:
        th2 = 1.0 - 0.5 * bw * math.erfc(-z2)
    return ThetaSigned(th1, th2)


def _qsq(theta: ThetaSigned, sf: ScalarFunctions, alpha: float) -> float:
    csum = theta.theta1p + theta.theta2p - 1.0
    return sf.N * sf.N * (alpha - sf.D) + 2.0 * sf.N * sf.S - csum


def equation_residuals_signed(theta: ThetaSigned, cfg: ModelConfig) -> tuple[float, float]:
    """Residuals (lhs - 1) of the two signed breakpoint-fraction equations."""
    sf = scalar_functions_signed(theta, cfg)
    lim = signed_limits(theta, cfg.beta_w)
    tail = 1.0 - theta.theta2p
    sig_eff = math.sqrt(cfg.sigma**2 + tail * cfg.x_mag_sc**2)
    coupling = cfg.x_mag_sc * math.sqrt(max(_qsq(theta, sf, cfg.alpha), 0.0)) / sig_eff
    return (sf.N * lim.G_plus + coupling - 1.0, lim.F_plus * sf.N - 1.0)


def _scalar_soft(theta: ThetaSigned, cfg: ModelConfig) -> ScalarFunctions:
    """scalar_functions_signed with the discriminant clamped at zero (solver
    surrogate; the clamp is inactive at any solution)."""
    bw = cfg.beta_w
    lim = signed_limits(theta, bw)
    S = lim.s_zero + lim.s_upper
    D = lim.normsq_zero + lim.normsq_upper
    R = cfg.r_sc - cfg.x_mag_sc * lim.s_tail
    if R <= 0.0:
        raise ConfigurationError("R <= 0")
    tail = 1.0 - theta.theta2p
    sig_eff = math.sqrt(cfg.sigma**2 + tail * cfg.x_mag_sc**2)
    A = sig_eff * (cfg.alpha - D) / R
    B = sig_eff * S / R
    quad = A * A - cfg.alpha + D
    if quad == 0.0:
        raise NoSolutionError("degenerate nu quadratic")
    csum = theta.theta1p + theta.theta2p - 1.0
    disc = max((A * B - S) ** 2 - (B * B + csum) * quad, 0.0)
    N = (-(A * B - S) - math.sqrt(disc)) / quad
    return ScalarFunctions(S, D, R, A, B, N)


def _nt_residuals(p, cfg: ModelConfig):
    N, t = float(p[0]), float(p[1])
    if N <= 1e-9 or t < -1e-9:
        return [_BIG, _BIG]
    try:
        theta = _theta_from_nt(N, max(t, 0.0), cfg.beta_w)
        sf = _scalar_soft(theta, cfg)
    except (NoSolutionError, ConfigurationError):
        return [_BIG, _BIG]
    tail = 1.0 - theta.theta2p
    sig_eff = math.sqrt(cfg.sigma**2 + tail * cfg.x_mag_sc**2)
    coupling = cfg.x_mag_sc * math.sqrt(max(_qsq(theta, sf, cfg.alpha), 0.0)) / sig_eff
    return [sf.N - N, coupling - t]


def _solve(cfg: ModelConfig) -> tuple[ThetaSigned, float]:
    fb = feasibility_breaking_point(cfg.alpha, cfg.beta_w, cfg.sigma, cfg.r_sc)
    if fb is not None and cfg.x_mag_sc < fb.x_break_sc:
        raise InfeasibleConfigError(
            f"x_mag_sc={cfg.x_mag_sc:.6g} below breaking point {fb.x_break_sc:.6g}"
        )
    residfn = lambda p: _nt_residuals(p, cfg)
    N, t = solve_two_unknowns(residfn, cfg.x_mag_sc)
    theta = _theta_from_nt(N, t, cfg.beta_w)
    res = solution_residual(theta, cfg, equation_residuals_signed, residfn, N, t)
    if res > 1e-8:
        raise NoSolutionError(f"signed breakpoint system residual {res:.3e} exceeds 1e-8")
    return theta, res


def solve_theta_signed(cfg: ModelConfig) -> ThetaSigned:
    """Solve the two signed breakpoint-fraction equations.

    Raises InfeasibleConfigError when x_mag_sc is below the breaking point.
    """
    return _solve(cfg)[0]


def predict_signed(cfg: ModelConfig) -> SignedPrediction:
    """Signed concentrating points; infeasible configurations are flagged."""
    try:
        theta, res = _solve(cfg)
    except InfeasibleConfigError:
        nan = math.nan
        return SignedPrediction(None, nan, nan, nan, nan, feasible=False)
    sf = scalar_functions_signed(theta, cfg)
    csum = theta.theta1p + theta.theta2p - 1.0
    tail = 1.0 - theta.theta2p
    x, sig = cfg.x_mag_sc, cfg.sigma
    Q = math.sqrt(max(_qsq(theta, sf, cfg.alpha), 0.0))
    w_num = sf.N * sf.N * (cfg.alpha * tail * x * x / (sig * sig) + sf.D) - 2.0 * sf.N * sf.S + csum
    E_w_over_sigma = math.sqrt(max(w_num, 0.0)) / Q
    sig_eff = math.sqrt(sig * sig + tail * x * x)
    E_xi = sig_eff * Q - sf.N * sf.R - x * tail
    return SignedPrediction(theta, sf.N, E_w_over_sigma, E_xi, res, feasible=True)


# ---------------------------------------------------------------------------
# Feasibility boundary.


def _normsq_upper_feas(theta2: float, bw: float) -> float:
    t2 = erfinv(2.0 * (1.0 - theta2) / bw - 1.0)
    return bw * _INV_SQRT_2PI * _SQRT2 * t2 * math.exp(-t2 * t2) + theta2 - 1.0 + bw


def _theta2_feas(x: float, alpha: float, bw: float, sigma: float) -> float:
    # zero-block squared norm at theta1_feas=(1+beta+)/2 is exactly (1-beta+)/2
    d_zero = 0.5 * (1.0 - bw)

    def resid(t2: float) -> float:
        G = _SQRT2 * erfinv(2.0 * (1.0 - t2) / bw - 1.0)
        gap = alpha - d_zero - _normsq_upper_feas(t2, bw)
        root = math.sqrt(gap) if gap > 0.0 else 0.0
        return G + x * root / math.sqrt(sigma**2 + (1.0 - t2) * x * x)

    lo, hi = 1.0 - 0.5 * bw + 1e-12, 1.0 - 1e-13
    return find_root(
        resid,
        Bracket(lo, hi, resid(lo), resid(hi)),
        SolverSettings(abs_tol=1e-13, rel_tol=1e-13, max_iter=300),
    )


def feasibility_breaking_point(
    alpha: float, beta_w_plus: float, sigma: float, r_sc: float
) -> Optional[FeasibilityPoint]:
    """Largest x_mag_sc at which the nonnegative program transitions to
    infeasible; None when the configuration is feasible at every x_mag_sc.

    Universally feasible scenarios are checked first: r_sc > sigma*sqrt(alpha)
    or alpha <= 0.5.
    """
    if r_sc > sigma * math.sqrt(alpha) or alpha <= 0.5:
        return None
    bw = beta_w_plus

    def margin(x: float) -> float:
        t2 = _theta2_feas(x, alpha, bw, sigma)
        G = _SQRT2 * erfinv(2.0 * (1.0 - t2) / bw - 1.0)
        e2 = math.exp(-(G / _SQRT2) ** 2)
        Rf = r_sc + x * bw * _INV_SQRT_2PI * e2
        return -(sigma**2 + (1.0 - t2) * x * x) * G / x - Rf

    lo = 1e-4
    if margin(lo) <= 0.0:
        return None
    hi = 8.0
    while margin(hi) > 0.0:
        hi *= 2.0
        if hi > 8.0 * 2**10:
            log.warning("no feasibility boundary found below x_mag_sc=%g", hi)
            return None
    xb = find_root(
        margin,
        Bracket(lo, hi, margin(lo), margin(hi)),
        SolverSettings(abs_tol=1e-12, rel_tol=1e-12, max_iter=300),
    )
    return FeasibilityPoint(xb, _theta2_feas(xb, alpha, bw, sigma), 0.5 * (1.0 + bw))
