"""Command-line interface.

    socp-phase fundamental --signed false --points 512 --out curve.csv
    socp-phase predict --alpha 0.5 --rho 2 --xmag-grid 0.5:3:0.5 --out pred.csv
    socp-phase predict-signed --alpha 0.5 --rho 2 --xmag-grid 0.5:3:0.5 --out pred.csv
    socp-phase feasibility --alpha 0.7 --rho 3 --out feas.csv [--scan --xmag-grid ...]
    socp-phase surrogate --alpha 0.5 --rho 2 --xmag-grid 0.5:3:0.5 --n 1000 --trials 50 --out s.csv
    socp-phase simulate  --alpha 0.5 --rho 2 --xmag-grid 0.5:3:0.5 --n 400 --trials 50 --out m.csv
    socp-phase compare   --alpha 0.5 --rho 2 --xmag-grid 0.5:3:0.5 --out agg.csv

Options may also come from a key=value config file via --config; explicit
flags override file values. Exit status: 0 on success, 2 when any trial
recorded a convergence failure, 1 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import math
import sys

from .experiment import (
    CampaignSpec,
    export_csv,
    feasibility_scan,
    run_campaign,
)
from .instances import derive_seed, generate_surrogate_draw
from .numerics import ConvergenceError
from .phase_curves import design_from_rho, fundamental_beta, tabulate_curve
from .predictor import ModelConfig, NoSolutionError, predict
from .predictor_signed import feasibility_breaking_point, predict_signed
from .surrogate import solve_surrogate_general, solve_surrogate_signed


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes"):
        return True
    if t in ("false", "0", "no"):
        return False
    raise UsageError(f"expected true/false, got {text!r}")


def _parse_grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise UsageError(f"grid must be LO:HI:STEP or a single value, got {text!r}")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0 or hi < lo:
        raise UsageError(f"bad grid {text!r}")
    out = []
    x = lo
    while x <= hi + 1e-12 * max(1.0, abs(hi)):
        out.append(round(x, 12))
        x += step
    return tuple(out)


def _load_config(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln in fh:
                ln = ln.split("#", 1)[0].strip()
                if not ln:
                    continue
                if "=" not in ln:
                    raise UsageError(f"config line without '=': {ln!r}")
                key, val = ln.split("=", 1)
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from exc
    return values


def _resolve_r(args) -> float | None:
    """r_sc from --r-sc / --r-mode; None means the design's optimal radius."""
    if getattr(args, "r_sc", None) is not None:
        return args.r_sc
    mode = getattr(args, "r_mode", None)
    if mode is None or mode == "opt":
        return None
    if mode.startswith("fixed:"):
        return float(mode.split(":", 1)[1])
    raise UsageError(f"--r-mode must be 'opt' or 'fixed:V', got {mode!r}")


def _add_common(sp, grid=True, mc=False):
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--beta-w", dest="beta_w", type=float)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--r-sc", dest="r_sc", type=float)
    sp.add_argument("--r-mode", dest="r_mode")
    if grid:
        sp.add_argument("--xmag-grid", dest="xmag_grid")
    if mc:
        sp.add_argument("--n", type=int)
        sp.add_argument("--trials", type=int, default=50)
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--config")
    sp.add_argument("--out", required=False)


def build_parser() -> _Parser:
    parser = _Parser(prog="socp-phase")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fundamental", description="tabulate the transition curves")
    sp.add_argument("--signed", type=_parse_bool, default=False)
    sp.add_argument("--points", type=int, default=512)
    sp.add_argument("--config")
    sp.add_argument("--out", required=False)

    for name in ("predict", "predict-signed"):
        sp = sub.add_parser(name, description="analytic concentrating points on an x grid")
        _add_common(sp)

    sp = sub.add_parser("feasibility", description="signed feasibility boundary")
    _add_common(sp, grid=True, mc=True)
    sp.add_argument("--scan", action="store_true",
                    help="also measure empirical feasible/bounded fractions on the grid")
    sp.add_argument("--n-socp", dest="n_socp", type=int, default=0)

    sp = sub.add_parser("surrogate", description="per-draw scalar-program Monte Carlo")
    _add_common(sp, mc=True)
    sp.add_argument("--signed", action="store_true")

    sp = sub.add_parser("simulate", description="constrained-l1 Monte Carlo on random instances")
    _add_common(sp, mc=True)
    sp.add_argument("--signed", action="store_true")

    sp = sub.add_parser("compare", description="both engines plus theory, aggregated")
    _add_common(sp, mc=True)
    sp.add_argument("--signed", action="store_true")
    sp.add_argument("--n-socp", dest="n_socp", type=int)
    sp.add_argument("--n-surrogate", dest="n_surrogate", type=int)
    return parser


def _apply_config(parser, argv):
    if "--config" not in argv:
        return parser.parse_args(argv)
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config needs a path")
    values = _load_config(argv[idx + 1])
    probe = parser.parse_args(argv)  # establishes the subcommand
    known = set(vars(probe))
    casts = {"alpha": float, "rho": float, "beta_w": float, "sigma": float,
             "r_sc": float, "n": int, "trials": int, "seed": int, "threads": int,
             "points": int, "n_socp": int, "n_surrogate": int,
             "signed": _parse_bool, "scan": _parse_bool}
    merged = vars(probe).copy()
    explicit = {a.lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, raw in values.items():
        if key not in known:
            raise UsageError(f"unknown config key {key!r}")
        if key in explicit:
            continue  # command-line flag wins
        merged[key] = casts.get(key, str)(raw)
    return argparse.Namespace(**merged)


def _design(args):
    if args.alpha is None:
        raise UsageError("--alpha is required")
    signed = bool(getattr(args, "signed", False)) or args.command == "predict-signed"
    if args.command == "feasibility":
        signed = True
    beta_w, r_sc = args.beta_w, _resolve_r(args)
    if args.rho is not None:
        d = design_from_rho(args.alpha, args.rho, args.sigma, signed)
        beta_w = beta_w if beta_w is not None else d.beta_w
        r_sc = r_sc if r_sc is not None else d.r_opt_sc
    if beta_w is None or r_sc is None:
        raise UsageError("need --rho, or both --beta-w and a radius (--r-sc/--r-mode)")
    return signed, beta_w, r_sc


def _grid(args) -> tuple[float, ...]:
    if not getattr(args, "xmag_grid", None):
        raise UsageError("--xmag-grid is required")
    return _parse_grid(args.xmag_grid)


def _write(rows, columns, args):
    if args.out:
        export_csv(rows, columns, args.out)
    else:
        sys.stdout.write(",".join(columns) + "\n")
        from .experiment import format_value
        for row in rows:
            sys.stdout.write(",".join(format_value(row.get(c)) for c in columns) + "\n")


def _cmd_fundamental(args) -> int:
    rows = [{"alpha_w": p.alpha_w, "beta_w": p.beta_w}
            for p in tabulate_curve(args.signed, args.points)]
    _write(rows, ["alpha_w", "beta_w"], args)
    return 0


def _cmd_predict(args, signed: bool) -> int:
    _, beta_w, r_sc = _design(args)
    failures = 0
    rows = []
    for x in _grid(args):
        cfg = ModelConfig(args.alpha, beta_w, args.sigma, x, r_sc)
        if signed:
            try:
                p = predict_signed(cfg)
            except (NoSolutionError, ConvergenceError):
                failures += 1
                continue
            th = p.theta_hat
            rows.append({
                "x_mag_sc": x,
                "theta1p": th.theta1p if th else None,
                "theta2p": th.theta2p if th else None,
                "E_nu": _num(p.E_nu), "E_w_over_sigma": _num(p.E_w_over_sigma),
                "E_xi_per_sqrt_n": _num(p.E_xi_per_sqrt_n),
                "residual": _num(p.residual), "feasible": p.feasible,
            })
        else:
            try:
                p = predict(cfg)
            except (NoSolutionError, ConvergenceError):
                failures += 1
                continue
            rows.append({
                "x_mag_sc": x,
                "theta1": p.theta_hat.theta1, "theta2": p.theta_hat.theta2,
                "theta3": p.theta_hat.theta3, "E_nu": p.E_nu,
                "E_w_over_sigma": p.E_w_over_sigma,
                "E_xi_per_sqrt_n": p.E_xi_per_sqrt_n, "residual": p.residual,
            })
    if signed:
        cols = ["x_mag_sc", "theta1p", "theta2p", "E_nu", "E_w_over_sigma",
                "E_xi_per_sqrt_n", "residual", "feasible"]
    else:
        cols = ["x_mag_sc", "theta1", "theta2", "theta3", "E_nu",
                "E_w_over_sigma", "E_xi_per_sqrt_n", "residual"]
    _write(rows, cols, args)
    return 2 if failures else 0


def _num(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else v


def _cmd_feasibility(args) -> int:
    _, beta_w, r_sc = _design(args)
    fb = feasibility_breaking_point(args.alpha, beta_w, args.sigma, r_sc)
    rows = [{
        "alpha": args.alpha, "rho": args.rho, "sigma": args.sigma,
        "beta_w_plus": beta_w, "r_sc": r_sc,
        "x_break_sc": fb.x_break_sc if fb else None,
        "theta1_feas": fb.theta1_feas if fb else None,
        "theta2_feas": fb.theta2_feas if fb else None,
    }]
    cols = ["alpha", "rho", "sigma", "beta_w_plus", "r_sc",
            "x_break_sc", "theta1_feas", "theta2_feas"]
    if not args.scan:
        _write(rows, cols, args)
        return 0
    spec = CampaignSpec(
        mode="feasibility-scan", alpha=args.alpha, sigma=args.sigma, signed=True,
        x_grid=_grid(args), rho=args.rho, beta_w=beta_w, r_sc=r_sc,
        n_socp=args.n_socp, n_surrogate=args.n or 1000, trials=args.trials,
        base_seed=args.seed, threads=args.threads,
    )
    scan_rows, x_break = feasibility_scan(spec)
    rows = [{
        "x_mag_sc": s.x_mag_sc, "p_socp_plus": s.p_socp_plus,
        "p_prim_plus": s.p_prim_plus, "x_break_sc": x_break,
    } for s in scan_rows]
    _write(rows, ["x_mag_sc", "p_socp_plus", "p_prim_plus", "x_break_sc"], args)
    return 0


def _cmd_surrogate(args) -> int:
    signed, beta_w, r_sc = _design(args)
    if not args.n:
        raise UsageError("--n is required")
    grid = _grid(args)
    n = args.n
    m = int(round(args.alpha * n))
    k = int(round(beta_w * n))
    rows, failures = [], 0
    for gi, x in enumerate(grid):
        for ti in range(args.trials):
            seed = derive_seed(args.seed, gi, ti)
            draw = generate_surrogate_draw(n, k, m, seed, signed)
            try:
                if signed:
                    sol = solve_surrogate_signed(draw, args.sigma, x / math.sqrt(n), r_sc * math.sqrt(n))
                else:
                    sol = solve_surrogate_general(draw, args.sigma, x / math.sqrt(n), r_sc * math.sqrt(n))
            except ConvergenceError:
                failures += 1
                rows.append({"x_mag_sc": x, "trial": ti, "status": "ConvergenceFailure"})
                continue
            ok = sol.status == "Bounded"
            rows.append({
                "x_mag_sc": x, "trial": ti,
                "xi_per_sqrt_n": sol.xi / math.sqrt(n) if ok else None,
                "w_over_sigma": sol.w_norm / args.sigma if ok else None,
                "nu": sol.nu if ok else None,
                "c1": sol.c1 if ok else None, "c2": sol.c2 if ok else None,
                "c3": sol.c3 if ok else None, "status": sol.status,
            })
    cols = ["x_mag_sc", "trial", "xi_per_sqrt_n", "w_over_sigma", "nu", "c1", "c2", "c3", "status"]
    _write(rows, cols, args)
    return 2 if failures else 0


def _campaign_spec(args, mode: str) -> CampaignSpec:
    signed, beta_w, r_sc = _design(args)
    kwargs = dict(
        mode=mode, alpha=args.alpha, sigma=args.sigma, signed=signed,
        x_grid=_grid(args), rho=args.rho, beta_w=beta_w, r_sc=r_sc,
        trials=args.trials, base_seed=args.seed, threads=args.threads,
    )
    if mode == "socp":
        kwargs["n_socp"] = args.n or 400
    elif mode == "both":
        kwargs["n_socp"] = getattr(args, "n_socp", None) or args.n or 400
        kwargs["n_surrogate"] = getattr(args, "n_surrogate", None) or args.n or 1000
    return CampaignSpec(**kwargs)


def _cmd_simulate(args) -> int:
    spec = _campaign_spec(args, "socp")
    records, _ = run_campaign(spec)
    rows = [{
        "x_mag_sc": rec.x_mag_sc, "trial": rec.trial, "source": rec.source,
        "w_over_sigma": rec.w_over_sigma, "obj_per_sqrt_n": rec.obj_per_sqrt_n,
        "status": rec.status,
    } for rec in records]
    _write(rows, ["x_mag_sc", "trial", "source", "w_over_sigma", "obj_per_sqrt_n", "status"], args)
    return 2 if any(rec.status == "ConvergenceFailure" for rec in records) else 0


def _cmd_compare(args) -> int:
    spec = _campaign_spec(args, "both")
    records, aggregates = run_campaign(spec)
    rows = [{
        "x_mag_sc": a.x_mag_sc, "source": a.source,
        "mean_w_over_sigma": _num(a.mean_w_over_sigma), "std_w": _num(a.std_w),
        "mean_obj_per_sqrt_n": _num(a.mean_obj_per_sqrt_n), "std_obj": _num(a.std_obj),
        "success_count": a.success_count, "trials": a.trials,
        "theory_w": _num(a.theory_w), "theory_obj": _num(a.theory_obj),
    } for a in aggregates]
    cols = ["x_mag_sc", "source", "mean_w_over_sigma", "std_w", "mean_obj_per_sqrt_n",
            "std_obj", "success_count", "trials", "theory_w", "theory_obj"]
    _write(rows, cols, args)
    return 2 if any(rec.status == "ConvergenceFailure" for rec in records) else 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command == "fundamental":
            code = _cmd_fundamental(args)
        elif args.command == "predict":
            code = _cmd_predict(args, signed=False)
        elif args.command == "predict-signed":
            code = _cmd_predict(args, signed=True)
        elif args.command == "feasibility":
            code = _cmd_feasibility(args)
        elif args.command == "surrogate":
            code = _cmd_surrogate(args)
        elif args.command == "simulate":
            code = _cmd_simulate(args)
        else:
            code = _cmd_compare(args)
        return code
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
