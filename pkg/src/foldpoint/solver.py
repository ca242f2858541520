"""Maximization of lambda(u) = min_i f_i(u): steepest ascent (SAD), quasi-direction
ascent (AQDSA), and quasi-direction ascent with an adaptive active-set width (MAQDSA).
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from .errors import DomainViolation, MaxIterExceeded, SingularSystem
from .linesearch import LineSearchConfig, golden_section_ascent
from .problem import ParametricProblem, active_set, eval_f, gradient_rows
from .qp import gram, steepest_ascent
from .quasi import quasi_direction, solve_bordered


class Algorithm(enum.Enum):
    SAD = "sad"
    AQDSA = "aqdsa"
    MAQDSA = "maqdsa"


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    STALLED = "Stalled"
    SINGULAR = "SingularEncountered"


class DirectionKind(enum.Enum):
    STEEPEST = "Steepest"
    QUASI = "Quasi"
    QP_FALLBACK = "QpFallback"


@dataclass(frozen=True)
class SolverConfig:
    u0: np.ndarray
    algorithm: Algorithm = Algorithm.MAQDSA
    eps: float = 1e-6
    dir_tol: float = 1e-11
    max_outer_iters: int = 10_000
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)
    trace: bool = True
    max_norm: float = 1e8  # divergence guard for unbounded superlevel sets

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.dir_tol > 0:
            raise ValueError("dir_tol must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be positive")
        object.__setattr__(self, "u0", np.array(self.u0, dtype=float))
        if isinstance(self.algorithm, str):
            object.__setattr__(self, "algorithm", Algorithm(self.algorithm.lower()))


@dataclass(frozen=True)
class IterationRecord:
    k: int
    lam: float
    eps_k: float
    active_count: int
    dir_value: float
    tau: float
    direction_kind: DirectionKind
    step_norm: float


@dataclass
class TurningPointResult:
    u_star: np.ndarray
    psi_star: np.ndarray
    lambda_star: float
    status: Status
    trace: List[IterationRecord]
    residual_max: float
    dir_value_final: float
    iterations: int
    events: List[str] = field(default_factory=list)

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def _normalized(psi):
    psi = np.asarray(psi, dtype=float)
    s = psi.sum()
    return psi / s if s != 0 else psi


class _Run:
    """Mutable state of one solver run."""

    def __init__(self, problem: ParametricProblem, cfg: SolverConfig):
        if not problem.feasible(cfg.u0):
            raise DomainViolation("initial point is outside the feasible set")
        self.problem = problem
        self.cfg = cfg
        self.u = cfg.u0.copy()
        self.rat = eval_f(problem, self.u)
        self.trace: List[IterationRecord] = []
        self.events: List[str] = []
        self.steps = 0

    def finish(self, status, psi, dir_value):
        rat = eval_f(self.problem, self.u)
        return TurningPointResult(
            u_star=self.u.copy(),
            psi_star=_normalized(psi),
            lambda_star=rat.lam,
            status=status,
            trace=self.trace,
            residual_max=float(np.max(np.abs(rat.f - rat.lam))),
            dir_value_final=float(dir_value),
            iterations=self.steps,
            events=self.events,
        )

    def rows(self, act):
        return gradient_rows(self.problem, self.u, self.rat.lam, act.indices)

    def step(self, d, eps_k, n_active, dir_value, kind):
        tau, lam_new = golden_section_ascent(self.problem, self.u, d, self.cfg.line_search)
        if tau > 0:
            self.u = self.u + tau * d
            self.rat = eval_f(self.problem, self.u)
            self.steps += 1
            if self.cfg.trace:
                self.trace.append(IterationRecord(
                    k=self.steps, lam=self.rat.lam, eps_k=eps_k, active_count=n_active,
                    dir_value=dir_value, tau=tau, direction_kind=kind,
                    step_norm=float(tau * np.linalg.norm(d)),
                ))
        return tau

    def diverged(self):
        return np.linalg.norm(self.u) > self.cfg.max_norm


def _qp_direction(rows):
    sa = steepest_ascent(rows)
    return sa.d_hat, sa


def run_sad(problem: ParametricProblem, cfg: SolverConfig) -> TurningPointResult:
    """Steepest ascent with the exact min-norm subgradient; stops on sigma < dir_tol, full set."""
    run = _Run(problem, cfg)
    n = problem.n
    stalls = 0
    sa = None
    for _ in range(cfg.max_outer_iters):
        act = active_set(run.rat, cfg.eps)
        rows = run.rows(act)
        sa = steepest_ascent(rows)
        if sa.sigma < cfg.dir_tol and len(act) == n:
            return run.finish(Status.CONVERGED, sa.alpha_hat, sa.sigma)
        if sa.d_hat is None:
            run.events.append(f"zero subgradient with |N_eps| = {len(act)} < n")
            return run.finish(Status.STALLED, _embed(sa.alpha_hat, act.indices, n), sa.sigma)
        tau = run.step(sa.d_hat, cfg.eps, len(act), sa.sigma, DirectionKind.STEEPEST)
        if tau == 0:
            stalls += 1
            if stalls >= 2:
                return run.finish(Status.STALLED, _embed(sa.alpha_hat, act.indices, n), sa.sigma)
        else:
            stalls = 0
        if run.diverged():
            run.events.append("iterate norm exceeded max_norm")
            break
    return run.finish(Status.MAX_ITER, _embed(sa.alpha_hat, act.indices, n), sa.sigma)


def _embed(alpha, indices, n):
    psi = np.zeros(n)
    psi[indices] = alpha
    return psi


def _quasi_or_fallback(run, rows):
    """Quasi-direction, or the steepest-ascent direction when the bordered system fails.

    Returns ``(direction, alpha, delta, kind)``; ``direction`` is None when no
    ascent direction exists.
    """
    try:
        qd = quasi_direction(rows, solve_bordered(gram(rows)))
    except SingularSystem:
        run.events.append(f"k={run.steps}: singular bordered system, using QP direction")
        d, sa = _qp_direction(rows)
        return d, sa.alpha_hat, sa.sigma_sq, DirectionKind.QP_FALLBACK
    if qd.y is None:
        run.events.append(f"k={run.steps}: Y = 0 with delta={qd.delta:.3e}, using QP direction")
        d, _ = _qp_direction(rows)
        return d, qd.alpha, qd.delta, DirectionKind.QP_FALLBACK
    return qd.y, qd.alpha, qd.delta, DirectionKind.QUASI


def _quasi_step(run, rows, d, kind, delta, n_active, eps_k):
    """One ascent step along d; returns tau (0 if no progress)."""
    tau = 0.0
    if d is not None:
        tau = run.step(d, eps_k, n_active, delta, kind)
    if tau == 0 and kind is DirectionKind.QUASI:
        # retry once along the exact steepest-ascent direction
        d_qp, sa = _qp_direction(rows)
        if d_qp is not None:
            tau = run.step(d_qp, eps_k, n_active, sa.sigma_sq, DirectionKind.QP_FALLBACK)
    return tau


def run_aqdsa(problem: ParametricProblem, cfg: SolverConfig) -> TurningPointResult:
    """Quasi-direction ascent with a fixed active-set width eps."""
    return _run_quasi(problem, cfg, adaptive=False)


def run_maqdsa(problem: ParametricProblem, cfg: SolverConfig) -> TurningPointResult:
    """Quasi-direction ascent whose active-set width starts at half the spread of f
    and is halved down to eps each time the inner stop test is met."""
    return _run_quasi(problem, cfg, adaptive=True)


def _run_quasi(problem, cfg, adaptive):
    run = _Run(problem, cfg)
    n = problem.n
    eps_k = max(0.5 * run.rat.spread, cfg.eps) if adaptive else cfg.eps
    psi, delta = np.full(n, 1.0 / n), np.inf
    loops = 0
    while run.steps < cfg.max_outer_iters and loops < 10 * cfg.max_outer_iters:
        loops += 1
        act = active_set(run.rat, eps_k)
        rows = run.rows(act)
        try:
            d, alpha, delta, kind = _quasi_or_fallback(run, rows)
        except MaxIterExceeded as exc:
            run.events.append(f"k={run.steps}: {exc}")
            return run.finish(Status.SINGULAR, psi, delta)
        psi = _embed(alpha, act.indices, n)
        if delta < cfg.dir_tol and len(act) == n:
            if eps_k > cfg.eps:
                eps_k = max(0.5 * eps_k, cfg.eps)
                continue
            return run.finish(Status.CONVERGED, alpha, delta)
        try:
            tau = _quasi_step(run, rows, d, kind, delta, len(act), eps_k)
        except MaxIterExceeded as exc:
            run.events.append(f"k={run.steps}: {exc}")
            return run.finish(Status.SINGULAR, psi, delta)
        if tau == 0:
            if eps_k > cfg.eps:
                run.events.append(f"k={run.steps}: no ascent at eps_k={eps_k:.3e}, halving")
                eps_k = max(0.5 * eps_k, cfg.eps)
                continue
            return run.finish(Status.STALLED, psi, delta)
        if run.diverged():
            run.events.append("iterate norm exceeded max_norm")
            break
    return run.finish(Status.MAX_ITER, psi, delta)


_RUNNERS = {
    Algorithm.SAD: run_sad,
    Algorithm.AQDSA: run_aqdsa,
    Algorithm.MAQDSA: run_maqdsa,
}


def solve(problem: ParametricProblem, cfg: SolverConfig) -> TurningPointResult:
    return _RUNNERS[cfg.algorithm](problem, cfg)


def sweep_threads():
    try:
        return max(1, int(os.environ.get("FOLDPOINT_THREADS", "1")))
    except ValueError:
        return 1


def delta_sweep(problem: ParametricProblem, cfg: SolverConfig, deltas, threads=None):
    """One independent run per direction tolerance; returns ``[(delta, result), ...]``."""
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be positive")
    cfgs = [replace(cfg, dir_tol=d) for d in deltas]
    threads = threads or sweep_threads()
    if threads == 1 or len(cfgs) == 1:
        results = [solve(problem, c) for c in cfgs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: solve(problem, c), cfgs))
    return list(zip(deltas, results))
