"""Independent checks on a computed turning point (u*, psi*, lam*).

``newton_refine`` solves the branching system

    F(u, lam) = 0,   D_u F(u, lam) phi = 0,   <phi, r> = 1

by Newton's method. It never touches the ratio functions or the ascent
machinery, so agreement with the maximin solvers is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, NamedTuple, Optional

import numpy as np
import scipy.linalg

from .errors import NoConvergence, SingularJacobian
from .problem import ParametricProblem, gradient_rows, jacobian_F


@dataclass
class VerificationReport:
    residual_F: float
    kernel_residual: float
    psi_nonneg: bool
    psi_min: float
    transversality: float
    kernel_dim_estimate: int
    rank_condition: bool
    refined_lambda: Optional[float] = None
    newton_iters: int = 0

    def to_dict(self):
        return asdict(self)


class Refinement(NamedTuple):
    u: np.ndarray
    phi: np.ndarray
    lam: float
    iters: int
    residuals: List[float]
    step_norms: List[float]


def left_kernel_weights(problem, u, psi):
    """Map ratio-space multipliers psi to a left-kernel candidate of D_u F.

    sum_i psi_i grad f_i = J^T (psi / G), so psi / G is the vector that
    annihilates J when psi annihilates the ratio gradients.
    """
    return np.asarray(psi, dtype=float) / problem.G(np.asarray(u, dtype=float))


def check_rank_condition(problem: ParametricProblem, u, lam, tol=1e-10):
    """Rank of the full ratio-gradient matrix is at least n - 1.

    Returns ``(ok, (s_min, s_second))`` with singular values in ascending order.
    """
    A = gradient_rows(problem, u, lam)
    s = np.linalg.svd(A, compute_uv=False)
    s_asc = np.sort(s)
    second = s_asc[1] if s_asc.size > 1 else s_asc[0]
    ok = bool(second > tol * s_asc[-1])
    return ok, (float(s_asc[0]), float(second))


def verify(problem: ParametricProblem, u_star, psi_star, lambda_star, tol=1e-6,
           refine=False, max_newton=20) -> VerificationReport:
    u = np.asarray(u_star, dtype=float)
    psi = np.asarray(psi_star, dtype=float)
    total = psi.sum()
    if total != 0:
        psi = psi / total
    lam = float(lambda_star)
    F = problem.T(u) - lam * problem.G(u)
    J = jacobian_F(problem, u, lam)
    w = left_kernel_weights(problem, u, psi)
    kr = J.T @ w
    kernel_residual = float(np.max(np.abs(kr)))

    s = np.linalg.svd(J, compute_uv=False)
    smax = s[0] if s.size else 0.0
    wn = np.linalg.norm(w)
    # a small J^T w certifies a singular value no larger than |J^T w| / |w|
    certified = np.linalg.norm(kr) / wn if wn > 0 else np.inf
    threshold = max(tol * smax, certified)
    kdim = int(np.sum(s <= threshold))

    rank_ok, _ = check_rank_condition(problem, u, lam)
    report = VerificationReport(
        residual_F=float(np.max(np.abs(F))),
        kernel_residual=kernel_residual,
        psi_nonneg=bool(np.all(psi >= 0)),
        psi_min=float(np.min(psi)),
        transversality=float(problem.G(u) @ psi),
        kernel_dim_estimate=kdim,
        rank_condition=rank_ok,
    )
    if refine:
        try:
            ref = newton_refine(problem, u, None, lam, max_iters=max_newton, psi=psi)
            report.refined_lambda = ref.lam
            report.newton_iters = ref.iters
        except (NoConvergence, SingularJacobian):
            report.refined_lambda = None
    return report


def null_vector(J):
    """Right singular vector of the smallest singular value, oriented to a positive sum."""
    _, _, vt = np.linalg.svd(J)
    phi = vt[-1]
    return phi if phi.sum() >= 0 else -phi


def _branching_residual(problem, u, phi, lam, r):
    J = jacobian_F(problem, u, lam)
    return np.concatenate([
        problem.T(u) - lam * problem.G(u),
        J @ phi,
        [r @ phi - 1.0],
    ]), J


def newton_refine(problem: ParametricProblem, u0, phi0, lambda0, r=None,
                  max_iters=20, tol=1e-13, psi=None) -> Refinement:
    """Newton's method on the 2n+1 branching system.

    ``phi0`` defaults to the null vector of D_u F(u0, lambda0). ``r`` defaults
    to ``psi / |psi|^2`` when ``psi`` is given, else ``1_n / n``. The mixed
    second derivatives of F are central differences of the Jacobian taken
    along phi. Convergence is declared when the residual max-norm drops below
    ``tol`` times the magnitude of the terms of F at the start.
    """
    u = np.array(u0, dtype=float)
    lam = float(lambda0)
    n = u.size
    if r is None:
        if psi is not None:
            psi = np.asarray(psi, dtype=float)
            r = psi / (psi @ psi)
        else:
            r = np.full(n, 1.0 / n)
    r = np.asarray(r, dtype=float)
    if phi0 is None:
        phi0 = null_vector(jacobian_F(problem, u, lam))
    phi = np.array(phi0, dtype=float)
    rp = r @ phi
    if rp == 0:
        raise SingularJacobian("<phi0, r> = 0")
    phi = phi / rp

    scale = 1.0 + np.max(np.abs(problem.T(u))) + abs(lam) * np.max(np.abs(problem.G(u)))
    residuals, steps = [], []
    for it in range(max_iters + 1):
        res, J = _branching_residual(problem, u, phi, lam, r)
        rn = float(np.max(np.abs(res)))
        residuals.append(rn)
        if rn <= tol * scale:
            return Refinement(u, phi, lam, it, residuals, steps)
        if it == max_iters:
            break
        h = 1e-6 * (1.0 + np.linalg.norm(u))
        pn = np.linalg.norm(phi)
        # D_u(J(u) phi) = (J(u + h phi) - J(u - h phi)) / (2h) by symmetry of second derivatives
        hp = h / pn
        H = (jacobian_F(problem, u + hp * phi, lam) - jacobian_F(problem, u - hp * phi, lam)) / (2 * hp)
        dG = problem.full_jac_G(u)
        K = np.zeros((2 * n + 1, 2 * n + 1))
        K[:n, :n] = J
        K[:n, 2 * n] = -problem.G(u)
        K[n:2 * n, :n] = H
        K[n:2 * n, n:2 * n] = J
        K[n:2 * n, 2 * n] = -dG @ phi
        K[2 * n, n:2 * n] = r
        try:
            lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SingularJacobian(str(exc)) from exc
        if np.min(np.abs(np.diag(lu))) < 1e-14 * np.max(np.abs(K)):
            raise SingularJacobian("branching-system Jacobian is singular")
        step = scipy.linalg.lu_solve((lu, piv), -res, check_finite=False)
        steps.append(float(np.max(np.abs(step))))
        u = u + step[:n]
        phi = phi + step[n:2 * n]
        lam += step[2 * n]
    raise NoConvergence(f"branching system residual {residuals[-1]:.3e} after {max_iters} iterations")
