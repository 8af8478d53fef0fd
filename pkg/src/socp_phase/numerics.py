"""Scalar special functions and root-finding utilities.

All routines here are pure and reentrant. ``erf``/``erfinv`` are the
workhorses of every closed-form expression in the package; ``find_root``
and ``solve_system`` are the bracketed scalar solver and the small damped
Newton solver that the analytic modules build on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_SQRT_PI = math.sqrt(math.pi)
_TWO_OVER_SQRT_PI = 2.0 / _SQRT_PI


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted; carries the best iterate seen."""

    def __init__(self, message: str, best, residual: float):
        super().__init__(f"{message} (best residual {residual:.3e})")
        self.best = best
        self.residual = residual


@dataclass(frozen=True)
class Bracket:
    """A sign-changing interval for scalar root finding."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError(f"bracket endpoints not ordered: [{self.lo}, {self.hi}]")
        if not (self.f_lo * self.f_hi < 0.0):
            raise DomainError(
                f"bracket does not straddle a root: f({self.lo})={self.f_lo}, f({self.hi})={self.f_hi}"
            )


@dataclass(frozen=True)
class SolverSettings:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.max_iter < 1:
            raise DomainError("invalid solver settings")


def erf(x: float) -> float:
    """Error function."""
    if not math.isfinite(x):
        raise DomainError(f"erf argument must be finite, got {x}")
    return math.erf(x)


def _erfinv_newton(p: float, x: float, steps: int = 4) -> float:
    # Newton on erf(x) - p; derivative 2/sqrt(pi) * exp(-x^2).
    for _ in range(steps):
        err = math.erf(x) - p
        if err == 0.0:
            break
        dx = err / (_TWO_OVER_SQRT_PI * math.exp(-x * x))
        x -= dx
        if abs(dx) <= 1e-17 * max(1.0, abs(x)):
            break
    return x


def _erfcinv_newton(q: float, x: float, steps: int = 6) -> float:
    # Newton on erfc(x) - q, stable in the tail: erfc has small relative
    # error there and the log-form step avoids exp overflow.
    for _ in range(steps):
        fc = math.erfc(x)
        if fc == q:
            break
        # dx = (erfc(x) - q) / (2/sqrt(pi) e^{-x^2}) computed via logs
        diff = fc - q
        mag = math.log(abs(diff)) + x * x - math.log(_TWO_OVER_SQRT_PI)
        dx = math.copysign(math.exp(mag), diff)
        x += dx
        if abs(dx) <= 1e-17 * max(1.0, abs(x)):
            break
    return x


def erfinv(p: float) -> float:
    """Inverse error function on (-1, 1).

    Initial approximation refined by Newton steps on ``erf`` (tail cases
    use the complementary form). Round-trip accuracy |erf(erfinv(p)) - p|
    is at the 1e-15 level across the domain.
    """
    if not (-1.0 < p < 1.0):
        raise DomainError(f"erfinv argument must satisfy |p| < 1, got {p}")
    if p == 0.0:
        return 0.0
    a = abs(p)
    if a <= 0.9999999:
        # Winitzki-style initial guess, then Newton.
        c = 0.147
        ln1m = math.log1p(-a * a)
        t = 2.0 / (math.pi * c) + 0.5 * ln1m
        x0 = math.sqrt(math.sqrt(t * t - ln1m / c) - t)
        x = _erfinv_newton(a, x0)
    else:
        q = 1.0 - a  # erfc(x) = q, q <= 1e-7
        lq = -math.log(q * _SQRT_PI)
        x0 = math.sqrt(max(lq - 0.5 * math.log(max(lq, 1e-300)), 0.0))
        x = _erfcinv_newton(q, x0)
    return math.copysign(x, p)


def erfinv_complement(q: float) -> float:
    """erfinv(1 - q) for q in (0, 2), accurate for tiny q.

    Avoids forming 1 - q: the tail is solved directly as erfc(x) = q, so a
    caller holding the exact complement keeps full relative precision where
    erfinv is large.
    """
    if not (0.0 < q < 2.0):
        raise DomainError(f"erfinv_complement argument must lie in (0, 2), got {q}")
    if q >= 0.25:
        return erfinv(1.0 - q)
    lq = -math.log(q * _SQRT_PI)
    x0 = math.sqrt(max(lq - 0.5 * math.log(max(lq, 1e-300)), 0.0))
    return _erfcinv_newton(q, max(x0, 0.8))


def find_root(f, bracket: Bracket, settings: SolverSettings = SolverSettings()) -> float:
    """Bracketed scalar root: Brent's bisection/secant/inverse-quadratic hybrid.

    Returns x* with |f(x*)| <= abs_tol or bracket width <= rel_tol*|x*|.
    The iterate never leaves the initial bracket.
    """
    a, b = bracket.lo, bracket.hi
    fa, fb = bracket.f_lo, bracket.f_hi
    c, fc = b, fb
    d = e = b - a
    best_x, best_f = b, abs(fb)
    for _ in range(settings.max_iter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        if abs(fb) < best_f:
            best_x, best_f = b, abs(fb)
        if fb == 0.0 or abs(fb) <= settings.abs_tol:
            return b
        tol1 = 0.5 * settings.rel_tol * abs(b) + 1e-15
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p_, q_ = 2.0 * xm * s, 1.0 - s
            else:
                q0 = fa / fc
                r0 = fb / fc
                p_ = s * (2.0 * xm * q0 * (q0 - r0) - (b - a) * (r0 - 1.0))
                q_ = (q0 - 1.0) * (r0 - 1.0) * (s - 1.0)
            if p_ > 0:
                q_ = -q_
            p_ = abs(p_)
            if 2.0 * p_ < min(3.0 * xm * q_ - abs(tol1 * q_), abs(e * q_)):
                e, d = d, p_ / q_
            else:
                d = e = xm
        else:
            d = e = xm
        a, fa = b, fb
        b = b + (d if abs(d) > tol1 else math.copysign(tol1, xm))
        fb = f(b)
    raise ConvergenceError("find_root: max_iter exceeded", best_x, best_f)


def bracket_root(f, lo: float, hi: float) -> Bracket:
    """Evaluate endpoints and package them; raises if no sign change."""
    return Bracket(lo, hi, f(lo), f(hi))


def _jacobian_fd(F, x: np.ndarray, Fx: np.ndarray) -> np.ndarray:
    d = x.size
    J = np.empty((Fx.size, d))
    for i in range(d):
        h = max(1e-7, 1e-7 * abs(x[i]))
        xp = x.copy()
        xp[i] += h
        J[:, i] = (np.asarray(F(xp), dtype=float) - Fx) / h
    return J


def solve_system(F, x0, settings: SolverSettings = SolverSettings()) -> np.ndarray:
    """Damped Newton for small systems (dimension <= 3 in this package).

    Forward-difference Jacobian, step-halving line search on ||F||_inf;
    success means ||F(x*)||_inf <= abs_tol.
    """
    x = np.asarray(x0, dtype=float).copy()
    Fx = np.asarray(F(x), dtype=float)
    res = float(np.max(np.abs(Fx)))
    merit = float(np.linalg.norm(Fx))
    best_x, best_res = x.copy(), res
    for _ in range(settings.max_iter):
        if res <= settings.abs_tol:
            return x
        J = _jacobian_fd(F, x, Fx)
        try:
            step = np.linalg.solve(J, -Fx)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, -Fx, rcond=None)
        t = 1.0
        for _halving in range(40):
            xn = x + t * step
            Fn = np.asarray(F(xn), dtype=float)
            mn = float(np.linalg.norm(Fn))
            if math.isfinite(mn) and mn < merit:
                x, Fx, merit = xn, Fn, mn
                res = float(np.max(np.abs(Fn)))
                break
            t *= 0.5
        else:
            raise ConvergenceError("solve_system: line search stalled", best_x, best_res)
        if res < best_res:
            best_x, best_res = x.copy(), res
    if res <= settings.abs_tol:
        return x
    raise ConvergenceError("solve_system: max_iter exceeded", best_x, best_res)
