"""Steepest ascent of lambda(u) = min_i f_i(u) via the minimum-norm point of the subdifferential.

The minimum-norm point of conv{g_1, ..., g_N} is found with Wolfe's algorithm
written purely in terms of the Gram matrix Gamma_jk = <g_j, g_k>, so the
active gradients themselves are only needed to form the final direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MaxIterExceeded
from .problem import GradientMatrix

MACHINE_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SteepestAscent:
    alpha_hat: np.ndarray
    sigma_sq: float
    grad_lambda: np.ndarray
    d_hat: Optional[np.ndarray]

    @property
    def sigma(self):
        return float(np.linalg.norm(self.grad_lambda))


def gram(A) -> np.ndarray:
    rows = A.rows if isinstance(A, GradientMatrix) else np.asarray(A, dtype=float)
    Gamma = rows @ rows.T
    return 0.5 * (Gamma + Gamma.T)


def qp_tolerance(Gamma):
    N = Gamma.shape[0]
    return 1e-10 * (1.0 + np.trace(Gamma) / N)


def _affine_minimizer(Gamma, S):
    """Minimize b^T Gamma_SS b subject to sum(b) = 1 (unconstrained in sign)."""
    k = len(S)
    M = np.zeros((k + 1, k + 1))
    M[:k, :k] = Gamma[np.ix_(S, S)]
    M[:k, k] = -1.0
    M[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    return sol[:k]


def _is_optimal(Gamma, alpha, tol):
    g = Gamma @ alpha
    val = alpha @ g
    return bool(np.all(g >= val - tol))


def _wolfe(Gamma, tol, max_iter):
    N = Gamma.shape[0]
    j0 = int(np.argmin(np.diag(Gamma)))
    alpha = np.zeros(N)
    alpha[j0] = 1.0
    S = [j0]
    it = 0
    while it < max_iter:
        it += 1
        g = Gamma @ alpha
        val = alpha @ g
        j = int(np.argmin(g))
        if g[j] >= val - tol or j in S:
            return alpha, True
        S.append(j)
        while it < max_iter:
            it += 1
            beta = _affine_minimizer(Gamma, S)
            if np.all(beta > 0):
                alpha = np.zeros(N)
                alpha[S] = beta
                break
            a_S = alpha[S]
            mask = beta <= 0
            theta = np.min(a_S[mask] / (a_S[mask] - beta[mask]))
            theta = min(max(theta, 0.0), 1.0)
            new = a_S + theta * (beta - a_S)
            keep = new > MACHINE_EPS
            if not np.any(keep):
                keep[int(np.argmax(new))] = True
            alpha = np.zeros(N)
            S = [s for s, k in zip(S, keep) if k]
            alpha[S] = new[keep]
            alpha /= alpha.sum()
    return alpha, False


def project_simplex(v):
    """Euclidean projection onto {x >= 0, sum x = 1}."""
    n = v.size
    s = np.sort(v)[::-1]
    css = np.cumsum(s) - 1.0
    ks = np.arange(1, n + 1)
    rho = np.nonzero(s - css / ks > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _projected_gradient(Gamma, alpha, tol, max_iter):
    L = max(np.linalg.eigvalsh(Gamma)[-1], MACHINE_EPS)
    x = alpha.copy()
    y = x.copy()
    t = 1.0
    for _ in range(max_iter):
        x_new = project_simplex(y - (Gamma @ y) / L)
        t_new = 0.5 * (1 + np.sqrt(1 + 4 * t * t))
        y = x_new + ((t - 1) / t_new) * (x_new - x)
        x, t = x_new, t_new
        if _is_optimal(Gamma, x, tol):
            return x, True
    return x, False


def min_norm_simplex(Gamma, max_iter=None, tol=None):
    """Minimize a^T Gamma a over the standard simplex.

    Returns ``(alpha_hat, sigma_sq)``. Raises MaxIterExceeded when neither the
    active-set iteration nor the projected-gradient fallback certify
    first-order optimality within budget.
    """
    Gamma = np.asarray(Gamma, dtype=float)
    N = Gamma.shape[0]
    if tol is None:
        tol = qp_tolerance(Gamma)
    if max_iter is None:
        max_iter = 100 * N
    if not np.any(Gamma):
        return np.full(N, 1.0 / N), 0.0
    # unit-scaled copy keeps the corral systems balanced against the border row
    s = np.max(np.abs(Gamma))
    G1, tol1 = Gamma / s, tol / s
    alpha, ok = _wolfe(G1, tol1, max_iter)
    if not (ok and _is_optimal(G1, alpha, tol1)):
        alpha, ok = _projected_gradient(G1, alpha, tol1, 100 * max_iter)
        if not ok:
            raise MaxIterExceeded(f"simplex QP not optimal after {max_iter} iterations")
    return alpha, max(float(alpha @ Gamma @ alpha), 0.0)


def steepest_ascent(A: GradientMatrix, max_iter=None) -> SteepestAscent:
    rows = A.rows if isinstance(A, GradientMatrix) else np.asarray(A, dtype=float)
    Gamma = gram(rows)
    alpha, _ = min_norm_simplex(Gamma, max_iter=max_iter)
    grad = rows.T @ alpha
    # recompute from the vector itself; the Gram form loses digits near zero
    sigma = float(np.linalg.norm(grad))
    scale = 1.0 + float(np.max(np.abs(rows))) if rows.size else 1.0
    d_hat = grad / sigma if sigma > MACHINE_EPS * scale else None
    return SteepestAscent(alpha_hat=alpha, sigma_sq=sigma * sigma, grad_lambda=grad, d_hat=d_hat)


def verify_kkt(Gamma, alpha_hat, tol):
    Gamma = np.asarray(Gamma, dtype=float)
    alpha_hat = np.asarray(alpha_hat, dtype=float)
    g = Gamma @ alpha_hat
    mu0 = float(alpha_hat @ g)
    mu = g - mu0
    return bool(np.all(mu >= -tol) and np.all(np.abs(mu * alpha_hat) <= tol))


def directional_derivative(rows, d):
    """lambda'(u; d) = min over active i of <grad f_i, d>."""
    return float(np.min(np.asarray(rows) @ d))
