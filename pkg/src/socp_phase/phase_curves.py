"""Weak-threshold curves for l1 recovery and the rho-parameterized designs.

``fundamental_beta`` solves, for a given alpha_w, the scalar characterization
whose root beta_w marks the recovery phase transition of l1 minimization on
noiseless Gaussian systems (general sign-unknown and nonnegative variants).
``design_from_rho`` maps the (alpha, rho) parameterization onto the curve:
alpha_w = rho^2 * alpha / (1 + rho^2) and the matched radius
r_opt = sigma * sqrt((alpha - alpha_w) n), given here per sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import Bracket, SolverSettings, erfinv, find_root

_SQRT2 = math.sqrt(2.0)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

_CURVE_SETTINGS = SolverSettings(abs_tol=1e-13, rel_tol=1e-13, max_iter=300)


@dataclass(frozen=True)
class CurvePoint:
    alpha_w: float
    beta_w: float


@dataclass(frozen=True)
class RhoDesign:
    """One (alpha, rho) operating point with its curve pair and matched radius."""

    alpha: float
    rho: float
    signed: bool
    alpha_w: float
    beta_w: float
    r_opt_sc: float


def characterization_residual(alpha_w: float, beta_w: float, signed: bool) -> float:
    """Residual of the transition characterization at (alpha_w, beta_w)."""
    if signed:
        t = erfinv(2.0 * (1.0 - alpha_w) / (1.0 - beta_w) - 1.0)
        return (1.0 - beta_w) * _INV_SQRT_2PI * math.exp(-t * t) / alpha_w - _SQRT2 * t
    t = erfinv((1.0 - alpha_w) / (1.0 - beta_w))
    return (1.0 - beta_w) * _SQRT_2_OVER_PI * math.exp(-t * t) / alpha_w - _SQRT2 * t


def fundamental_beta(alpha_w: float, signed: bool = False) -> float:
    """The beta_w in (0, alpha_w) on the transition curve at this alpha_w."""
    if not (0.0 < alpha_w < 1.0):
        raise ValueError(f"alpha_w must lie in (0, 1), got {alpha_w}")

    def resid(b: float) -> float:
        return characterization_residual(alpha_w, b, signed)

    lo, hi = 1e-9, alpha_w - 1e-9
    return find_root(resid, Bracket(lo, hi, resid(lo), resid(hi)), _CURVE_SETTINGS)


def design_from_rho(alpha: float, rho: float, sigma: float, signed: bool = False) -> RhoDesign:
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if rho <= 0.0:
        raise ValueError(f"rho must be positive, got {rho}")
    alpha_w = rho * rho * alpha / (1.0 + rho * rho)
    beta_w = fundamental_beta(alpha_w, signed)
    r_opt_sc = sigma * math.sqrt(alpha / (1.0 + rho * rho))
    return RhoDesign(alpha, rho, signed, alpha_w, beta_w, r_opt_sc)


def tabulate_curve(signed: bool = False, points: int = 512) -> list[CurvePoint]:
    """Curve samples at evenly spaced alpha_w, for CSV export / interpolation."""
    if points < 2:
        raise ValueError("points must be >= 2")
    out = []
    for i in range(points):
        aw = (i + 1) / (points + 1)
        out.append(CurvePoint(aw, fundamental_beta(aw, signed)))
    return out
