"""Monte-Carlo campaign orchestration and CSV export.

A campaign sweeps a grid of scaled signal magnitudes, running the selected
engines per (grid point, trial): the constrained-l1 solver on fresh random
instances of size n_socp, the per-draw scalar-program solver at size
n_surrogate, or the analytic predictor alone. Trial seeds are derived by
hashing (base_seed, grid index, trial index), so a campaign is reproducible
to the byte regardless of thread count; failures of individual trials are
recorded, never fatal.

Per-trial finite-n parameters follow the sqrt(n) scaling of the model
configuration: x_mag = x_mag_sc/sqrt(n), r = r_sc*sqrt(n), m = round(alpha*n),
k = round(beta_w*n).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import socp as socp_mod
from . import surrogate as surr_mod
from .instances import derive_seed, generate_instance, generate_surrogate_draw
from .numerics import ConvergenceError
from .phase_curves import design_from_rho
from .predictor import ModelConfig, NoSolutionError, predict
from .predictor_signed import feasibility_breaking_point, predict_signed

MODES = ("socp", "surrogate", "both", "theory", "feasibility-scan")


@dataclass(frozen=True)
class CampaignSpec:
    mode: str
    alpha: float
    sigma: float
    signed: bool
    x_grid: tuple[float, ...]
    rho: Optional[float] = None
    beta_w: Optional[float] = None  # overrides the rho-design value when given
    r_sc: Optional[float] = None  # None selects the design's optimal radius
    n_socp: int = 400
    n_surrogate: int = 1000
    trials: int = 50
    base_seed: int = 1
    threads: int = 1
    socp_tol: float = 1e-6

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.x_grid:
            raise ValueError("x grid must be nonempty")
        if self.rho is None and (self.beta_w is None or self.r_sc is None):
            raise ValueError("either rho or both beta_w and r_sc must be given")

    def resolve(self) -> tuple[float, float]:
        """(beta_w, r_sc) after applying the rho design where needed."""
        if self.rho is not None:
            design = design_from_rho(self.alpha, self.rho, self.sigma, self.signed)
            return (
                self.beta_w if self.beta_w is not None else design.beta_w,
                self.r_sc if self.r_sc is not None else design.r_opt_sc,
            )
        return self.beta_w, self.r_sc


@dataclass(frozen=True)
class TrialRecord:
    x_mag_sc: float
    trial: int
    source: str  # "socp" | "surrogate" | "theory"
    w_over_sigma: Optional[float]
    obj_per_sqrt_n: Optional[float]
    status: str  # Optimal/Bounded/Infeasible/Unbounded/ConvergenceFailure
    nu: Optional[float] = None
    c1: Optional[int] = None
    c2: Optional[int] = None
    c3: Optional[int] = None

    @property
    def success(self) -> bool:
        return self.status in ("Optimal", "Bounded")


@dataclass(frozen=True)
class AggregateRow:
    x_mag_sc: float
    source: str
    mean_w_over_sigma: float
    std_w: float
    mean_obj_per_sqrt_n: float
    std_obj: float
    success_count: int
    trials: int
    theory_w: float
    theory_obj: float


@dataclass(frozen=True)
class ScanRow:
    x_mag_sc: float
    p_socp_plus: Optional[float]
    p_prim_plus: Optional[float]


def _theory_point(spec: CampaignSpec, beta_w: float, r_sc: float, x: float):
    cfg = ModelConfig(spec.alpha, beta_w, spec.sigma, x, r_sc)
    if spec.signed:
        pred = predict_signed(cfg)
        if not pred.feasible:
            return math.nan, math.nan
        return pred.E_w_over_sigma, pred.E_xi_per_sqrt_n
    pred = predict(cfg)
    return pred.E_w_over_sigma, pred.E_xi_per_sqrt_n


def _run_socp_trial(spec: CampaignSpec, beta_w: float, r_sc: float,
                    x: float, trial: int, seed: int) -> TrialRecord:
    n = spec.n_socp
    m = int(round(spec.alpha * n))
    k = int(round(beta_w * n))
    inst = generate_instance(n, m, k, spec.sigma, x / math.sqrt(n), seed)
    r = r_sc * math.sqrt(n)
    try:
        if spec.signed:
            sol = socp_mod.solve_socp_signed(inst, r, tol=spec.socp_tol)
        else:
            sol = socp_mod.solve_socp(inst, r, tol=spec.socp_tol)
    except ConvergenceError:
        return TrialRecord(x, trial, "socp", None, None, "ConvergenceFailure")
    if sol.status != "Optimal":
        return TrialRecord(x, trial, "socp", None, None, sol.status)
    return TrialRecord(
        x, trial, "socp", sol.w_norm / spec.sigma, sol.f_obj / math.sqrt(n), "Optimal"
    )


def _run_surrogate_trial(spec: CampaignSpec, beta_w: float, r_sc: float,
                         x: float, trial: int, seed: int) -> TrialRecord:
    n = spec.n_surrogate
    m = int(round(spec.alpha * n))
    k = int(round(beta_w * n))
    draw = generate_surrogate_draw(n, k, m, seed, spec.signed)
    r = r_sc * math.sqrt(n)
    try:
        if spec.signed:
            sol = surr_mod.solve_surrogate_signed(draw, spec.sigma, x / math.sqrt(n), r)
        else:
            sol = surr_mod.solve_surrogate_general(draw, spec.sigma, x / math.sqrt(n), r)
    except ConvergenceError:
        return TrialRecord(x, trial, "surrogate", None, None, "ConvergenceFailure")
    if sol.status != "Bounded":
        return TrialRecord(x, trial, "surrogate", None, None, sol.status)
    return TrialRecord(
        x, trial, "surrogate", sol.w_norm / spec.sigma, sol.xi / math.sqrt(n),
        "Bounded", nu=sol.nu, c1=sol.c1, c2=sol.c2, c3=sol.c3,
    )


def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) >= 2 else 0.0
    return mean, std


def run_campaign(spec: CampaignSpec) -> tuple[list[TrialRecord], list[AggregateRow]]:
    """Execute the campaign; returns (per-trial records, per-grid aggregates)."""
    beta_w, r_sc = spec.resolve()
    theory: dict[float, tuple[float, float]] = {}
    if spec.mode != "feasibility-scan":
        for x in spec.x_grid:
            try:
                theory[x] = _theory_point(spec, beta_w, r_sc, x)
            except (NoSolutionError, ConvergenceError):
                theory[x] = (math.nan, math.nan)

    jobs = []
    if spec.mode == "theory":
        for gi, x in enumerate(spec.x_grid):
            w, obj = theory[x]
            status = "Optimal" if math.isfinite(w) else "Infeasible"
            jobs.append(TrialRecord(x, 0, "theory", w if math.isfinite(w) else None,
                                    obj if math.isfinite(obj) else None, status))
        records = jobs
    else:
        tasks = []
        for gi, x in enumerate(spec.x_grid):
            for ti in range(spec.trials):
                seed = derive_seed(spec.base_seed, gi, ti)
                if spec.mode in ("socp", "both"):
                    tasks.append(("socp", x, ti, seed))
                if spec.mode in ("surrogate", "both"):
                    tasks.append(("surrogate", x, ti, seed))

        def run(task):
            engine, x, ti, seed = task
            if engine == "socp":
                return _run_socp_trial(spec, beta_w, r_sc, x, ti, seed)
            return _run_surrogate_trial(spec, beta_w, r_sc, x, ti, seed)

        if spec.threads > 1:
            with ThreadPoolExecutor(max_workers=spec.threads) as pool:
                records = list(pool.map(run, tasks))
        else:
            records = [run(t) for t in tasks]
        order = {"socp": 0, "surrogate": 1, "theory": 2}
        records.sort(key=lambda rec: (spec.x_grid.index(rec.x_mag_sc),
                                      rec.trial, order[rec.source]))

    aggregates = []
    for x in spec.x_grid:
        th_w, th_obj = theory.get(x, (math.nan, math.nan))
        for source in ("socp", "surrogate", "theory"):
            grp = [rec for rec in records if rec.source == source and rec.x_mag_sc == x]
            if not grp:
                continue
            good = [rec for rec in grp if rec.success]
            mw, sw = _mean_std([rec.w_over_sigma for rec in good])
            mo, so = _mean_std([rec.obj_per_sqrt_n for rec in good])
            aggregates.append(AggregateRow(x, source, mw, sw, mo, so,
                                           len(good), len(grp), th_w, th_obj))
    return records, aggregates


def feasibility_scan(spec: CampaignSpec):
    """Empirical feasible/bounded fractions along the x grid.

    Returns (rows, x_break_sc): p_socp_plus from the nonnegative phase-1
    distance at n_socp (skipped when n_socp <= 0), p_prim_plus from the
    recession analysis at n_surrogate; x_break_sc from the analytic boundary
    (None when universally feasible).
    """
    if not spec.signed:
        raise ValueError("feasibility scan requires a signed spec")
    beta_w, r_sc = spec.resolve()
    fb = feasibility_breaking_point(spec.alpha, beta_w, spec.sigma, r_sc)

    def one(task):
        gi, x, ti = task
        seed = derive_seed(spec.base_seed, gi, ti)
        socp_ok = None
        if spec.n_socp > 0:
            n = spec.n_socp
            m = int(round(spec.alpha * n))
            k = int(round(beta_w * n))
            inst = generate_instance(n, m, k, spec.sigma, x / math.sqrt(n), seed)
            r = r_sc * math.sqrt(n)
            _, dist = socp_mod.min_residual_nonneg(inst.A, inst.y, stop_below=r * (1 - 1e-9))
            socp_ok = dist <= r * (1.0 + 1e-6)
        prim_ok = None
        if spec.n_surrogate > 0:
            n = spec.n_surrogate
            m = int(round(spec.alpha * n))
            k = int(round(beta_w * n))
            draw = generate_surrogate_draw(n, k, m, seed, True)
            ray = surr_mod.detect_unbounded(draw, spec.sigma, x / math.sqrt(n), r_sc * math.sqrt(n))
            prim_ok = ray.status == "Bounded"
        return gi, socp_ok, prim_ok

    tasks = [(gi, x, ti) for gi, x in enumerate(spec.x_grid) for ti in range(spec.trials)]
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            outcomes = list(pool.map(one, tasks))
    else:
        outcomes = [one(t) for t in tasks]

    rows = []
    for gi, x in enumerate(spec.x_grid):
        grp = [(s, p) for g, s, p in outcomes if g == gi]
        p_socp = None if spec.n_socp <= 0 else sum(1 for s, _ in grp if s) / len(grp)
        p_prim = None if spec.n_surrogate <= 0 else sum(1 for _, p in grp if p) / len(grp)
        rows.append(ScanRow(x, p_socp, p_prim))
    return rows, (fb.x_break_sc if fb is not None else None)


def format_value(v) -> str:
    """Full-precision CSV field: 17 significant digits for floats."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def export_csv(rows: list[dict], columns: list[str], path: str) -> None:
    """UTF-8 CSV with a header row and deterministic formatting/ordering."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(format_value(row.get(c)) for c in columns) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path!r}: {exc}") from exc


def load_csv(path: str) -> tuple[list[str], list[dict]]:
    """Inverse of export_csv; numeric fields parsed back to float/int."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    header = lines[0].split(",") if lines else []
    rows = []
    for ln in lines[1:]:
        if not ln:
            continue
        row = {}
        for key, raw in zip(header, ln.split(",")):
            if raw == "":
                row[key] = None
            elif raw in ("true", "false"):
                row[key] = raw == "true"
            else:
                try:
                    row[key] = int(raw)
                except ValueError:
                    try:
                        row[key] = float(raw)
                    except ValueError:
                        row[key] = raw
        rows.append(row)
    return header, rows
