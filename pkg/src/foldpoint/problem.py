"""Parametric problems T(u) - lam * G(u) = 0 and the ratio functions f_i = T_i / G_i.

Indices are zero-based throughout the package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, InvalidMultiplier, PositivityViolation

Vector = np.ndarray
RowCallback = Callable[[np.ndarray, int], np.ndarray]


class Structure(enum.Enum):
    DENSE = "dense"
    TRIDIAGONAL = "tridiagonal"
    BANDED = "banded"


def orthant_max_step(u, d):
    """Supremum of tau >= 0 with u + tau*d strictly inside the positive orthant."""
    u = np.asarray(u, dtype=float)
    d = np.asarray(d, dtype=float)
    neg = d < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-u[neg] / d[neg]))


def orthant_feasible(u):
    return bool(np.all(np.asarray(u) > 0))


@dataclass(frozen=True)
class ParametricProblem:
    """Callbacks describing F(u, lam) = T(u) - lam * G(u) on an open set S.

    ``jac_T`` / ``jac_G`` are optional whole-matrix callbacks. When given they
    must agree with the row callbacks; they only avoid per-row Python calls.
    """

    n: int
    eval_T: Callable[[np.ndarray], np.ndarray]
    eval_G: Callable[[np.ndarray], np.ndarray]
    grad_T_row: RowCallback
    grad_G_row: RowCallback
    feasible: Callable[[np.ndarray], bool] = orthant_feasible
    max_step: Callable[[np.ndarray, np.ndarray], float] = orthant_max_step
    structure_hint: Structure = Structure.DENSE
    bandwidth: int = 0
    jac_T: Optional[Callable[[np.ndarray], np.ndarray]] = None
    jac_G: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "problem"
    params: dict = field(default_factory=dict)

    def T(self, u):
        return np.asarray(self.eval_T(u), dtype=float)

    def G(self, u):
        return np.asarray(self.eval_G(u), dtype=float)

    def full_jac_T(self, u):
        if self.jac_T is not None:
            return np.asarray(self.jac_T(u), dtype=float)
        return np.array([self.grad_T_row(u, i) for i in range(self.n)], dtype=float)

    def full_jac_G(self, u):
        if self.jac_G is not None:
            return np.asarray(self.jac_G(u), dtype=float)
        return np.array([self.grad_G_row(u, i) for i in range(self.n)], dtype=float)


@dataclass(frozen=True)
class RatioEvaluation:
    f: np.ndarray
    lam: float
    mu: float
    argmin: int

    @property
    def spread(self):
        return self.mu - self.lam


@dataclass(frozen=True)
class ActiveSet:
    indices: np.ndarray
    eps: float

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class GradientMatrix:
    """Rows are grad f_i(u) for the active indices, in ascending order."""

    rows: np.ndarray
    active: ActiveSet


def check_positivity_G(problem: ParametricProblem, u):
    """Return ``(ok, index)``; ``index`` is the first i with G_i(u) <= 0, else None."""
    g = problem.G(np.asarray(u, dtype=float))
    bad = np.flatnonzero(~(g > 0))
    if bad.size:
        return False, int(bad[0])
    return True, None


def _checked_G(problem, u):
    g = problem.G(u)
    bad = np.flatnonzero(~(g > 0))
    if bad.size:
        i = int(bad[0])
        raise PositivityViolation(i, float(g[i]))
    return g


def eval_f(problem: ParametricProblem, u) -> RatioEvaluation:
    u = np.asarray(u, dtype=float)
    if not problem.feasible(u):
        raise DomainViolation("u is outside the feasible set")
    g = _checked_G(problem, u)
    t = problem.T(u)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(t))):
        raise DomainViolation("T or G is not finite at u")
    f = t / g
    # np.argmin returns the first occurrence, i.e. the smallest tied index
    i = int(np.argmin(f))
    return RatioEvaluation(f=f, lam=float(f[i]), mu=float(np.max(f)), argmin=i)


def grad_f_row(problem: ParametricProblem, u, lam, i):
    u = np.asarray(u, dtype=float)
    gi = problem.G(u)[i]
    if not gi > 0:
        raise PositivityViolation(i, float(gi))
    return (np.asarray(problem.grad_T_row(u, i), dtype=float)
            - lam * np.asarray(problem.grad_G_row(u, i), dtype=float)) / gi


def active_set(rat: RatioEvaluation, eps) -> ActiveSet:
    if not eps > 0:
        raise ValueError("eps must be positive")
    idx = np.flatnonzero(rat.f - rat.lam < eps)
    return ActiveSet(indices=idx, eps=float(eps))


def eval_Lambda(problem: ParametricProblem, u, psi):
    """Weighted ratio <T(u), psi> / <G(u), psi> for psi in the positive orthant."""
    psi = np.asarray(psi, dtype=float)
    if np.any(psi < 0) or not np.any(psi > 0):
        raise InvalidMultiplier("psi must be nonnegative and nonzero")
    u = np.asarray(u, dtype=float)
    den = float(problem.G(u) @ psi)
    if not den > 0:
        raise PositivityViolation(-1, den)
    return float(problem.T(u) @ psi) / den


def eval_extended_functional(problem: ParametricProblem, u, psi, lam):
    u = np.asarray(u, dtype=float)
    return float((problem.T(u) - lam * problem.G(u)) @ np.asarray(psi, dtype=float))


def jacobian_F(problem: ParametricProblem, u, lam):
    """D_u F(u, lam); row i is grad T_i(u) - lam * grad G_i(u)."""
    u = np.asarray(u, dtype=float)
    return problem.full_jac_T(u) - lam * problem.full_jac_G(u)


def gradient_rows(problem: ParametricProblem, u, lam, indices=None):
    """Rows grad f_i(u) for the given indices (all when None)."""
    u = np.asarray(u, dtype=float)
    g = _checked_G(problem, u)
    if indices is None:
        return jacobian_F(problem, u, lam) / g[:, None]
    indices = np.asarray(indices, dtype=int)
    if problem.jac_T is not None and problem.jac_G is not None:
        J = jacobian_F(problem, u, lam)
        return J[indices] / g[indices, None]
    rows = [
        (np.asarray(problem.grad_T_row(u, i), dtype=float)
         - lam * np.asarray(problem.grad_G_row(u, i), dtype=float)) / g[i]
        for i in indices
    ]
    return np.array(rows, dtype=float).reshape(len(indices), problem.n)


def assemble_gradient_matrix(problem: ParametricProblem, u, rat: RatioEvaluation,
                             act: ActiveSet) -> GradientMatrix:
    rows = gradient_rows(problem, u, rat.lam, act.indices)
    return GradientMatrix(rows=rows, active=act)


def fd_gradient(fun, u, i=None, rel_step=1e-6):
    """Central finite differences of a vector callback; testing aid only.

    Returns the full Jacobian, or its row ``i`` when given.
    """
    u = np.asarray(u, dtype=float)
    cols = []
    for j in range(u.size):
        h = rel_step * (1.0 + abs(u[j]))
        up = u.copy()
        um = u.copy()
        up[j] += h
        um[j] -= h
        cols.append((np.asarray(fun(up)) - np.asarray(fun(um))) / (2 * h))
    jac = np.column_stack(cols)
    return jac if i is None else jac[i]
