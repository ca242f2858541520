"""Golden-section maximization of kappa(tau) = lambda(u + tau * d) inside S."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, PositivityViolation
from .problem import ParametricProblem, eval_f

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
FEASIBILITY_MARGIN = 0.99


@dataclass(frozen=True)
class LineSearchConfig:
    bracket_init: float = 1e-2
    bracket_growth: float = 2.0
    gs_tol: Optional[float] = None  # None -> 1e-10 * (1 + ||u||)
    max_expansions: int = 60
    max_gs_iters: int = 200

    def __post_init__(self):
        if not self.bracket_init > 0:
            raise ValueError("bracket_init must be positive")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must exceed 1")
        if self.gs_tol is not None and not self.gs_tol > 0:
            raise ValueError("gs_tol must be positive")
        if self.max_expansions < 1 or self.max_gs_iters < 1:
            raise ValueError("iteration caps must be positive")


def kappa(problem: ParametricProblem, u, d, tau):
    return eval_f(problem, np.asarray(u) + tau * np.asarray(d)).lam


def maximize_along(fun: Callable[[float], float], tau_cap, cfg: LineSearchConfig, tol,
                   f0=None):
    """Bracket and golden-section a local maximizer of ``fun`` on [0, tau_cap).

    Returns ``(tau, value)`` with ``value >= fun(0)``; ``(0, fun(0))`` when no
    probed step improves on the start.
    """
    if f0 is None:
        f0 = fun(0.0)
    if not tau_cap > 0:
        return 0.0, f0

    b = min(cfg.bracket_init, tau_cap)
    fb = fun(b)
    if fb > f0:
        # expand while kappa keeps increasing
        a = 0.0
        lo, hi = a, b
        for _ in range(cfg.max_expansions):
            c = min(b * cfg.bracket_growth, tau_cap)
            if c <= b:
                lo, hi = a, b
                break
            fc = fun(c)
            if fc <= fb:
                lo, hi = a, c
                break
            a, b, fb = b, c, fc
            lo, hi = a, b
        else:
            return b, fb
        best_tau, best_val = b, fb
    else:
        # shrink toward zero until a step improves
        for _ in range(cfg.max_expansions):
            b *= 0.5
            fb = fun(b)
            if fb > f0:
                break
        else:
            return 0.0, f0
        lo, hi = 0.0, 2.0 * b
        best_tau, best_val = b, fb

    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(cfg.max_gs_iters):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = fun(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = fun(x1)
    for t, v in ((x1, f1), (x2, f2)):
        if v > best_val:
            best_tau, best_val = t, v
    if best_val <= f0:
        return 0.0, f0
    return best_tau, best_val


def golden_section_ascent(problem: ParametricProblem, u, d, cfg: LineSearchConfig = None):
    """Step length along the unit direction ``d`` maximizing lambda(u + tau d)."""
    cfg = cfg or LineSearchConfig()
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    if not problem.feasible(u):
        raise DomainViolation("line search started outside S")
    f0 = eval_f(problem, u).lam
    tau_cap = FEASIBILITY_MARGIN * problem.max_step(u, d)
    tol = cfg.gs_tol if cfg.gs_tol is not None else 1e-10 * (1.0 + np.linalg.norm(u))

    def fun(tau):
        v = u + tau * d
        if not problem.feasible(v):
            return -np.inf
        # far bracket probes may overflow the nonlinearity; treat as infeasible
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                return eval_f(problem, v).lam
            except (DomainViolation, PositivityViolation):
                return -np.inf

    return maximize_along(fun, tau_cap, cfg, tol, f0=f0)
