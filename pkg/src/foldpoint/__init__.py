"""Maximal turning points of T(u) - lam * G(u) = 0 by maximizing min_i T_i(u) / G_i(u)."""

from .errors import (
    DomainViolation, FoldpointError, InvalidMultiplier, InvalidParams, MaxIterExceeded,
    NoConvergence, PositivityViolation, SingularJacobian, SingularSystem,
)
from .problem import ParametricProblem, eval_f
from .problems import ConvexConcaveParams, make_bratu, make_convex_concave, make_linear_perron
from .solver import (
    Algorithm, SolverConfig, Status, TurningPointResult, delta_sweep, run_aqdsa, run_maqdsa,
    run_sad, solve,
)
from .verification import newton_refine, verify

__version__ = "0.1.0"

__all__ = [
    "Algorithm", "ConvexConcaveParams", "DomainViolation", "FoldpointError", "InvalidMultiplier",
    "InvalidParams", "MaxIterExceeded", "NoConvergence", "ParametricProblem", "PositivityViolation",
    "SingularJacobian", "SingularSystem", "SolverConfig", "Status", "TurningPointResult",
    "delta_sweep", "eval_f", "make_bratu", "make_convex_concave", "make_linear_perron",
    "newton_refine", "run_aqdsa", "run_maqdsa", "run_sad", "solve", "verify",
]
