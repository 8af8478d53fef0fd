"""Problem-dependent performance prediction, sign-unknown case.

Assembles the scalar functions (S, D, R, A, B, N) from the sorted-Gaussian
block limits, solves the three breakpoint-fraction equations, and returns
the concentrating points of the dual scale nu, the error norm ||w||_2/sigma,
and the shifted objective per sqrt(n).

Solver structure: with p = (N, t), where t is the value of the coupling
term x*Q/sigma~, the quantile equations invert in closed form to
theta(N, t), leaving two consistency conditions: N(theta) = N (quadratic
root) and x*Q/sigma~ = t. The inner condition is eliminated by a bracketed
bisection in t for each N, the outer condition is located by a sign-change
scan over a geometric N grid (the branch formula has poles where its
denominator vanishes, so roots are accepted only when the residual is
genuinely small), and the solution is polished by damped Newton on the
full pair. Every accepted solution is re-verified against the original
three equations at 1e-8.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .numerics import ConvergenceError, SolverSettings, solve_system
from .order_stats import (
    ThetaGeneral,
    limit_normsq_lower_block,
    limit_normsq_upper_block,
    limit_normsq_zero_block,
    limit_sums,
    quantiles,
)

log = logging.getLogger(__name__)

_SQRT2 = math.sqrt(2.0)
_BIG = 1e30


class NoSolutionError(RuntimeError):
    """The breakpoint system has no admissible solution at this configuration."""


class ConfigurationError(ValueError):
    """Configuration makes the scalar functions ill-defined (e.g. R <= 0)."""


@dataclass(frozen=True)
class ModelConfig:
    """One prediction/experiment operating point.

    x_mag_sc and r_sc are the sqrt(n)-scaled signal magnitude and radius: a
    size-n instance uses x_mag = x_mag_sc/sqrt(n) and r = r_sc*sqrt(n).
    """

    alpha: float
    beta_w: float
    sigma: float
    x_mag_sc: float
    r_sc: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigurationError(f"alpha={self.alpha} outside (0, 1)")
        if not (0.0 < self.beta_w < self.alpha):
            raise ConfigurationError(f"beta_w={self.beta_w} outside (0, alpha)")
        if self.sigma <= 0.0:
            raise ConfigurationError(f"sigma={self.sigma} must be positive")
        if self.x_mag_sc < 0.0:
            raise ConfigurationError(f"x_mag_sc={self.x_mag_sc} must be nonnegative")
        if self.r_sc <= 0.0:
            raise ConfigurationError(f"r_sc={self.r_sc} must be positive")


@dataclass(frozen=True)
class ScalarFunctions:
    S: float
    D: float
    R: float
    A: float
    B: float
    N: float


@dataclass(frozen=True)
class GeneralPrediction:
    theta_hat: ThetaGeneral
    E_nu: float
    E_w_over_sigma: float
    E_xi_per_sqrt_n: float
    residual: float


def scalar_functions(theta: ThetaGeneral, cfg: ModelConfig) -> ScalarFunctions:
    """(S, D, R, A, B, N) at the given block fractions."""
    bw = cfg.beta_w
    theta.validate(bw)
    s_zero, s_upper, s_lower, s_middle = limit_sums(theta, bw)
    S = s_zero + s_upper - s_lower
    D = (
        limit_normsq_zero_block(theta.theta1, bw)
        + limit_normsq_upper_block(theta.theta2, bw)
        + limit_normsq_lower_block(theta.theta3, bw)
    )
    R = cfg.r_sc - cfg.x_mag_sc * s_middle
    if R <= 0.0:
        raise ConfigurationError(
            f"R={R:.6g} <= 0: radius smaller than the middle-block correction"
        )
    mid = 1.0 - theta.theta2 - theta.theta3
    sig_eff = math.sqrt(cfg.sigma**2 + mid * cfg.x_mag_sc**2)
    A = sig_eff * (cfg.alpha - D) / R
    B = sig_eff * S / R
    quad = A * A - cfg.alpha + D
    csum = theta.theta1 + theta.theta2 + theta.theta3 - 1.0
    disc = (A * B - S) ** 2 - (B * B + csum) * quad
    if disc < 0.0:
        raise NoSolutionError(f"negative discriminant {disc:.3e} in the nu quadratic")
    if quad == 0.0:
        raise NoSolutionError("degenerate nu quadratic (zero leading coefficient)")
    N = (-(A * B - S) - math.sqrt(disc)) / quad
    return ScalarFunctions(S, D, R, A, B, N)


def _theta_from_nt(N: float, t: float, bw: float) -> ThetaGeneral:
    # erfc forms keep the small block fractions relatively accurate
    th1 = bw + (1.0 - bw) * math.erfc(1.0 / (_SQRT2 * N))
    z2 = (1.0 - t) / (_SQRT2 * N)
    if z2 >= 0.0:
        th2 = 1.0 - bw + 0.5 * bw * math.erfc(z2)
    else:
        th2 = 1.0 - 0.5 * bw * math.erfc(-z2)
    th3 = 0.5 * bw * math.erfc((1.0 + t) / (_SQRT2 * N))
    return ThetaGeneral(th1, th2, th3)


def _qsq(theta: ThetaGeneral, sf: ScalarFunctions, alpha: float) -> float:
    csum = theta.theta1 + theta.theta2 + theta.theta3 - 1.0
    return sf.N * sf.N * (alpha - sf.D) + 2.0 * sf.N * sf.S - csum


def equation_residuals(theta: ThetaGeneral, cfg: ModelConfig) -> tuple[float, float, float]:
    """Residuals (lhs - 1) of the three breakpoint-fraction equations."""
    sf = scalar_functions(theta, cfg)
    F, G, H = quantiles(theta, cfg.beta_w)
    mid = 1.0 - theta.theta2 - theta.theta3
    sig_eff = math.sqrt(cfg.sigma**2 + mid * cfg.x_mag_sc**2)
    coupling = cfg.x_mag_sc * math.sqrt(max(_qsq(theta, sf, cfg.alpha), 0.0)) / sig_eff
    return (
        sf.N * G + coupling - 1.0,
        sf.N * H - coupling - 1.0,
        F * sf.N - 1.0,
    )


def _scalar_soft(theta: ThetaGeneral, cfg: ModelConfig) -> ScalarFunctions:
    """scalar_functions with the discriminant clamped at zero: a continuous
    surrogate for solver residuals (the clamp is inactive at any solution)."""
    bw = cfg.beta_w
    s_zero, s_upper, s_lower, s_middle = limit_sums(theta, bw)
    S = s_zero + s_upper - s_lower
    D = (
        limit_normsq_zero_block(theta.theta1, bw)
        + limit_normsq_upper_block(theta.theta2, bw)
        + limit_normsq_lower_block(theta.theta3, bw)
    )
    R = cfg.r_sc - cfg.x_mag_sc * s_middle
    if R <= 0.0:
        raise ConfigurationError("R <= 0")
    mid = 1.0 - theta.theta2 - theta.theta3
    sig_eff = math.sqrt(cfg.sigma**2 + mid * cfg.x_mag_sc**2)
    A = sig_eff * (cfg.alpha - D) / R
    B = sig_eff * S / R
    quad = A * A - cfg.alpha + D
    if quad == 0.0:
        raise NoSolutionError("degenerate nu quadratic")
    csum = theta.theta1 + theta.theta2 + theta.theta3 - 1.0
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
    mid = 1.0 - theta.theta2 - theta.theta3
    sig_eff = math.sqrt(cfg.sigma**2 + mid * cfg.x_mag_sc**2)
    coupling = cfg.x_mag_sc * math.sqrt(max(_qsq(theta, sf, cfg.alpha), 0.0)) / sig_eff
    return [sf.N - N, coupling - t]


# ---------------------------------------------------------------------------
# Shared two-unknown solver (also used by the signed predictor).

_N_GRID = [0.02 * 1.22**i for i in range(80)]  # N in [0.02, ~1.6e5]
_NEWTON = SolverSettings(abs_tol=1e-11, rel_tol=1e-11, max_iter=120)


def _inner_coupling(residfn, N: float, x_mag_sc: float) -> float:
    """Self-consistent coupling t at fixed N: root of residfn([N, t])[1] on t >= 0.

    Probes can leave the admissible region at large t (negative discriminant
    in the quadratic); those evaluate as NaN and are treated as lying past
    the root, which the final full-residual gate double-checks.
    """
    if x_mag_sc == 0.0:
        return 0.0

    def psi(t: float) -> float:
        r = residfn([N, t])[1]
        return r if abs(r) < _BIG else math.nan

    flo = psi(0.0)
    if math.isnan(flo):
        return math.nan
    lo = 0.0
    if flo <= 0.0:
        # psi(0) <= 0 only through the discriminant clamp (the coupling is
        # nonnegative); look for a positive-coupling window at larger t
        found = False
        t_probe = 1e-4
        while t_probe < 1e7:
            fp = psi(t_probe)
            if not math.isnan(fp) and fp > 0.0:
                lo, flo, found = t_probe, fp, True
                break
            t_probe *= 2.0
        if not found:
            return math.nan
    hi = max(2.0 * lo, 1.0, x_mag_sc)
    for _ in range(80):
        fhi = psi(hi)
        if math.isnan(fhi) or fhi < 0.0:
            break
        lo, hi = hi, hi * 2.0
    else:
        return math.nan
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        fm = psi(mid)
        if not math.isnan(fm) and fm > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * (1.0 + hi):
            break
    return 0.5 * (lo + hi)


def solve_two_unknowns(residfn, x_mag_sc: float) -> tuple[float, float]:
    """Scan-and-polish solver for the (N, t) consistency pair."""

    def g(N: float) -> float:
        t = _inner_coupling(residfn, N, x_mag_sc)
        if math.isnan(t):
            return math.nan
        r = residfn([N, t])[0]
        return r if abs(r) < _BIG else math.nan

    def refine(lo: float, hi: float, fl: float) -> None:
        for _ in range(110):
            mid = math.sqrt(lo * hi)
            fm = g(mid)
            if math.isnan(fm):
                break
            if (fm > 0.0) == (fl > 0.0):
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * hi:
                break
        root = math.sqrt(lo * hi)
        gr = g(root)
        if not math.isnan(gr) and abs(gr) <= 1e-7:  # rejects branch poles
            candidates.append(root)

    vals = [g(N) for N in _N_GRID]
    candidates: list[float] = []
    for i in range(len(_N_GRID) - 1):
        a, b = vals[i], vals[i + 1]
        if math.isnan(a) and math.isnan(b):
            continue
        if not (math.isnan(a) or math.isnan(b)):
            if a * b < 0.0:
                refine(_N_GRID[i], _N_GRID[i + 1], a)
            continue
        # one endpoint inadmissible: walk to the admissibility edge, then
        # check for a sign change between the edge and the finite endpoint
        nan_lo = math.isnan(a)
        lo, hi = _N_GRID[i], _N_GRID[i + 1]
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if math.isnan(g(mid)) == nan_lo:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-12 * hi:
                break
        edge = hi if nan_lo else lo
        ge = g(edge)
        fin = b if nan_lo else a
        if math.isnan(ge) or ge * fin >= 0.0:
            continue
        if nan_lo:
            refine(edge, _N_GRID[i + 1], ge)
        else:
            refine(_N_GRID[i], edge, fin)
    if not candidates:
        raise NoSolutionError("no admissible root of the breakpoint system")
    if len(candidates) > 1:
        log.info("multiple breakpoint-system roots N=%s; keeping best residual", candidates)
    best = None
    for N in candidates:
        p = [N, _inner_coupling(residfn, N, x_mag_sc)]
        try:
            p = list(solve_system(lambda q: residfn(q), p, _NEWTON))
        except ConvergenceError as exc:
            p = list(exc.best)
        r = residfn(p)
        score = max(abs(r[0]), abs(r[1]))
        if best is None or score < best[0]:
            best = (score, p)
    return float(best[1][0]), max(float(best[1][1]), 0.0)


def solution_residual(theta, cfg, eq_resid, residfn, N: float, t: float) -> float:
    """Max residual of the original equations, falling back to the inverted
    (N, t) consistency pair for components whose block fraction has rounded
    onto a degenerate boundary (where the direct quantile form is +-inf)."""
    eqs = eq_resid(theta, cfg)
    finite = [abs(r) for r in eqs if math.isfinite(r)]
    if len(finite) == len(eqs):
        return max(finite)
    nt = residfn([N, t])
    return max(finite + [abs(nt[0]), abs(nt[1])])


def _solve(cfg: ModelConfig) -> tuple[ThetaGeneral, float]:
    residfn = lambda p: _nt_residuals(p, cfg)
    N, t = solve_two_unknowns(residfn, cfg.x_mag_sc)
    theta = _theta_from_nt(N, t, cfg.beta_w)
    res = solution_residual(theta, cfg, equation_residuals, residfn, N, t)
    if res > 1e-8:
        raise NoSolutionError(f"breakpoint system residual {res:.3e} exceeds 1e-8")
    return theta, res


def solve_theta(cfg: ModelConfig) -> ThetaGeneral:
    """Solve the three breakpoint-fraction equations for this configuration."""
    return _solve(cfg)[0]


def predict(cfg: ModelConfig) -> GeneralPrediction:
    """Concentrating points of nu, ||w||_2/sigma, and the objective per sqrt(n)."""
    theta, res = _solve(cfg)
    sf = scalar_functions(theta, cfg)
    csum = theta.theta1 + theta.theta2 + theta.theta3 - 1.0
    mid = 1.0 - theta.theta2 - theta.theta3
    x, sig = cfg.x_mag_sc, cfg.sigma
    Q = math.sqrt(max(_qsq(theta, sf, cfg.alpha), 0.0))
    w_num = sf.N * sf.N * (cfg.alpha * mid * x * x / (sig * sig) + sf.D) - 2.0 * sf.N * sf.S + csum
    E_w_over_sigma = math.sqrt(max(w_num, 0.0)) / Q
    sig_eff = math.sqrt(sig * sig + mid * x * x)
    _, _, _, s_middle = limit_sums(theta, cfg.beta_w)
    E_xi = sig_eff * Q - sf.N * (cfg.r_sc - x * s_middle) - x * mid - 2.0 * theta.theta3 * x
    return GeneralPrediction(theta, sf.N, E_w_over_sigma, E_xi, res)
