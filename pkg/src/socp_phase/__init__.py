"""Performance prediction and Monte-Carlo validation for norm-ball-constrained
l1 recovery of equal-magnitude sparse vectors from noisy Gaussian measurements."""

from .experiment import AggregateRow, CampaignSpec, TrialRecord, export_csv, feasibility_scan, load_csv, run_campaign
from .instances import Instance, SurrogateDraw, derive_seed, generate_instance, generate_surrogate_draw
from .numerics import Bracket, ConvergenceError, DomainError, SolverSettings, erf, erfinv, find_root, solve_system
from .order_stats import ThetaGeneral, ThetaSigned
from .phase_curves import CurvePoint, RhoDesign, design_from_rho, fundamental_beta, tabulate_curve
from .predictor import (
    ConfigurationError,
    GeneralPrediction,
    ModelConfig,
    NoSolutionError,
    predict,
    scalar_functions,
    solve_theta,
)
from .predictor_signed import (
    FeasibilityPoint,
    InfeasibleConfigError,
    SignedPrediction,
    feasibility_breaking_point,
    predict_signed,
    scalar_functions_signed,
    solve_theta_signed,
)
from .socp import SocpSolution, solve_socp, solve_socp_signed
from .surrogate import RayResult, SurrogateSolution, detect_unbounded, solve_surrogate_general, solve_surrogate_signed

__all__ = [
    "AggregateRow", "Bracket", "CampaignSpec", "ConfigurationError", "ConvergenceError",
    "CurvePoint", "DomainError", "FeasibilityPoint", "GeneralPrediction",
    "InfeasibleConfigError", "Instance", "ModelConfig", "NoSolutionError", "RayResult",
    "RhoDesign", "SignedPrediction", "SocpSolution", "SolverSettings", "SurrogateDraw",
    "SurrogateSolution", "ThetaGeneral", "ThetaSigned", "TrialRecord", "derive_seed",
    "design_from_rho", "detect_unbounded", "erf", "erfinv", "export_csv",
    "feasibility_breaking_point", "feasibility_scan", "find_root", "fundamental_beta",
    "generate_instance", "generate_surrogate_draw", "load_csv", "predict",
    "predict_signed", "run_campaign", "scalar_functions", "scalar_functions_signed",
    "solve_socp", "solve_socp_signed", "solve_surrogate_general",
    "solve_surrogate_signed", "solve_system", "solve_theta", "solve_theta_signed",
    "tabulate_curve",
]

__version__ = "0.1.0"
