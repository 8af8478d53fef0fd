"""Large-n limits of sorted-Gaussian block quantities.

For a length-n vector whose first (1-beta_w)n entries are sorted magnitudes
of standard normals and whose last beta_w*n entries are negated normals
sorted in decreasing order, these are the closed-form limits (per-n) of
partial squared norms, partial sums, and breakpoint quantiles, indexed by
the block fractions theta. The signed variant sorts plain (negated) values
in the first block instead of magnitudes.

Every erfinv argument is evaluated through its distance to +-1, computed
natively from the block fractions, so the quantile values stay accurate
when a block fraction sits within a few ulps of its boundary; at the exact
boundary the t*e^{-t^2} -> 0 and e^{-t^2} -> 0 limits are taken by
branching rather than by evaluating erfinv at +-1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import DomainError, erfinv, erfinv_complement

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# Slack on the theta domain checks: Newton iterates may graze a boundary.
_SLACK = 1e-12


@dataclass(frozen=True)
class ThetaGeneral:
    """Block fractions for the magnitude-sorted case."""

    theta1: float
    theta2: float
    theta3: float

    def validate(self, beta_w: float) -> "ThetaGeneral":
        if not (beta_w - _SLACK <= self.theta1 <= 1.0 + _SLACK):
            raise DomainError(f"theta1={self.theta1} outside [beta_w, 1]")
        if not (1.0 - beta_w - _SLACK <= self.theta2 <= 1.0 + _SLACK):
            raise DomainError(f"theta2={self.theta2} outside [1-beta_w, 1]")
        if not (-_SLACK <= self.theta3 <= beta_w + _SLACK):
            raise DomainError(f"theta3={self.theta3} outside [0, beta_w]")
        if self.theta1 + self.theta2 + self.theta3 - 1.0 < -_SLACK:
            raise DomainError("theta1+theta2+theta3-1 must be nonnegative")
        return self


@dataclass(frozen=True)
class ThetaSigned:
    """Block fractions for the sign-aware (plain-sorted) case."""

    theta1p: float
    theta2p: float

    def validate(self, beta_w_plus: float) -> "ThetaSigned":
        if not (beta_w_plus - _SLACK <= self.theta1p <= 1.0 + _SLACK):
            raise DomainError(f"theta1p={self.theta1p} outside [beta_w+, 1]")
        if not (1.0 - beta_w_plus - _SLACK <= self.theta2p <= 1.0 + _SLACK):
            raise DomainError(f"theta2p={self.theta2p} outside [1-beta_w+, 1]")
        if self.theta1p + self.theta2p - 1.0 < -_SLACK:
            raise DomainError("theta1p+theta2p-1 must be nonnegative")
        return self


def _t_w(comp_hi: float, comp_lo: float) -> tuple[float, float]:
    """(t, e^{-t^2}) for t = erfinv(q), with q given through its distances
    comp_hi = 1 - q and comp_lo = 1 + q (each computed natively by callers)."""
    if comp_hi <= 0.0:
        return math.inf, 0.0
    if comp_lo <= 0.0:
        return -math.inf, 0.0
    if comp_hi < 0.25:
        t = erfinv_complement(comp_hi)
    elif comp_lo < 0.25:
        t = -erfinv_complement(comp_lo)
    else:
        t = erfinv(1.0 - comp_hi)
    return t, math.exp(-t * t)


def _zero_tw(theta1: float, beta_w: float) -> tuple[float, float]:
    # q = (1-theta1)/(1-beta_w) in [0, 1]
    return _t_w((theta1 - beta_w) / (1.0 - beta_w), (2.0 - beta_w - theta1) / (1.0 - beta_w))


def _upper_tw(theta2: float, beta_w: float) -> tuple[float, float]:
    # q = 2(1-theta2)/beta_w - 1
    return _t_w(2.0 * (theta2 - 1.0 + beta_w) / beta_w, 2.0 * (1.0 - theta2) / beta_w)


def _lower_tw(theta3: float, beta_w: float) -> tuple[float, float]:
    # q = 2(beta_w-theta3)/beta_w - 1
    return _t_w(2.0 * theta3 / beta_w, 2.0 * (beta_w - theta3) / beta_w)


def _zero_signed_tw(theta1p: float, beta_w_plus: float) -> tuple[float, float]:
    # q = 2(1-theta1p)/(1-beta_w_plus) - 1
    return _t_w(
        2.0 * (theta1p - beta_w_plus) / (1.0 - beta_w_plus),
        2.0 * (1.0 - theta1p) / (1.0 - beta_w_plus),
    )


def _texp(tw: tuple[float, float]) -> float:
    t, w = tw
    return 0.0 if w == 0.0 else t * w


def _check_beta(beta_w: float):
    if not (0.0 < beta_w < 1.0):
        raise DomainError(f"beta_w={beta_w} outside (0, 1)")


def limit_normsq_zero_block(theta1: float, beta_w: float) -> float:
    """Per-n squared norm of the zero-block segment above the theta1 cut."""
    _check_beta(beta_w)
    if not (beta_w - _SLACK <= theta1 <= 1.0 + _SLACK):
        raise DomainError(f"theta1={theta1} outside [beta_w, 1]")
    return (
        (1.0 - beta_w) * _INV_SQRT_2PI * 2.0 * _SQRT2 * _texp(_zero_tw(theta1, beta_w))
        + theta1
        - beta_w
    )


def limit_normsq_upper_block(theta2: float, beta_w: float) -> float:
    """Per-n squared norm of the sparse-block head down to the theta2 cut."""
    _check_beta(beta_w)
    if not (1.0 - beta_w - _SLACK <= theta2 <= 1.0 + _SLACK):
        raise DomainError(f"theta2={theta2} outside [1-beta_w, 1]")
    return (
        beta_w * _INV_SQRT_2PI * _SQRT2 * _texp(_upper_tw(theta2, beta_w))
        + theta2
        - 1.0
        + beta_w
    )


def limit_normsq_lower_block(theta3: float, beta_w: float) -> float:
    """Per-n squared norm of the sparse-block tail of fraction theta3."""
    _check_beta(beta_w)
    if not (-_SLACK <= theta3 <= beta_w + _SLACK):
        raise DomainError(f"theta3={theta3} outside [0, beta_w]")
    return beta_w * _INV_SQRT_2PI * _SQRT2 * _texp(_lower_tw(theta3, beta_w)) + theta3


def limit_sums(theta: ThetaGeneral, beta_w: float) -> tuple[float, float, float, float]:
    """Per-n partial sums (s_zero, s_upper, s_lower, s_middle).

    s_zero and s_upper are the sums over the zero-block segment and the
    sparse-block head; s_lower (<= 0) is the sum over the tail; s_middle
    is the remaining sparse-block sum, equal to -s_lower - s_upper.
    """
    _check_beta(beta_w)
    theta.validate(beta_w)
    _, w1 = _zero_tw(theta.theta1, beta_w)
    _, w2 = _upper_tw(theta.theta2, beta_w)
    _, w3 = _lower_tw(theta.theta3, beta_w)
    s_zero = (1.0 - beta_w) * _SQRT_2_OVER_PI * w1
    s_upper = beta_w * _INV_SQRT_2PI * w2
    s_lower = -beta_w * _INV_SQRT_2PI * w3
    return s_zero, s_upper, s_lower, -s_lower - s_upper


def quantiles(theta: ThetaGeneral, beta_w: float) -> tuple[float, float, float]:
    """Breakpoint quantiles (F, G, H) of the sorted vector at the theta cuts."""
    _check_beta(beta_w)
    theta.validate(beta_w)
    t1, _ = _zero_tw(theta.theta1, beta_w)
    t2, _ = _upper_tw(theta.theta2, beta_w)
    t3, _ = _lower_tw(theta.theta3, beta_w)
    return _SQRT2 * t1, _SQRT2 * t2, _SQRT2 * t3


@dataclass(frozen=True)
class SignedLimits:
    normsq_zero: float
    normsq_upper: float
    s_zero: float
    s_upper: float
    s_tail: float
    F_plus: float
    G_plus: float


def signed_limits(theta: ThetaSigned, beta_w_plus: float) -> SignedLimits:
    """Signed-case analogues; the zero block is plain-sorted (not magnitudes)."""
    _check_beta(beta_w_plus)
    theta.validate(beta_w_plus)
    bw = beta_w_plus
    t1, w1 = _zero_signed_tw(theta.theta1p, bw)
    t2, w2 = _upper_tw(theta.theta2p, bw)
    normsq_zero = (1.0 - bw) * _INV_SQRT_2PI * _SQRT2 * _texp((t1, w1)) + theta.theta1p - bw
    normsq_upper = bw * _INV_SQRT_2PI * _SQRT2 * _texp((t2, w2)) + theta.theta2p - 1.0 + bw
    s_zero = (1.0 - bw) * _INV_SQRT_2PI * w1
    s_upper = bw * _INV_SQRT_2PI * w2
    s_tail = -bw * _INV_SQRT_2PI * w2
    return SignedLimits(normsq_zero, normsq_upper, s_zero, s_upper, s_tail, _SQRT2 * t1, _SQRT2 * t2)
