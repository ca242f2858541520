"""Benchmark problems: discretized convex-concave and Bratu-Gelfand BVPs, linear Perron."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .problem import ParametricProblem, Structure, orthant_feasible, orthant_max_step


@dataclass(frozen=True)
class Grid1D:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParams("need n >= 2 interior points")

    @property
    def h(self):
        return 1.0 / (self.n + 1)

    @property
    def x(self):
        return np.arange(1, self.n + 1) * self.h


@dataclass(frozen=True)
class ConvexConcaveParams:
    q: float
    gamma: float

    def __post_init__(self):
        if not 0 < self.q < 1:
            raise InvalidParams(f"q = {self.q} violates 0 < q < 1")
        if not self.gamma > 1:
            raise InvalidParams(f"gamma = {self.gamma} violates gamma > 1")


def second_difference(u):
    """-u_{i+1} + 2 u_i - u_{i-1} with u_0 = u_{n+1} = 0, boundary rows written out."""
    n = u.size
    out = np.empty(n)
    out[0] = -u[1] + 2 * u[0]
    out[1:-1] = -u[2:] + 2 * u[1:-1] - u[:-2]
    out[-1] = 2 * u[-1] - u[-2]
    return out


def laplacian_matrix(n):
    return 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)


def _laplacian_row(n, i):
    row = np.zeros(n)
    row[i] = 2.0
    if i > 0:
        row[i - 1] = -1.0
    if i < n - 1:
        row[i + 1] = -1.0
    return row


def _unit_row(n, i, value):
    row = np.zeros(n)
    row[i] = value
    return row


def make_convex_concave(n, params: ConvexConcaveParams) -> ParametricProblem:
    """-u'' = lam * u^q + u^gamma on (0, 1), u(0) = u(1) = 0, second-order differences."""
    grid = Grid1D(n)
    if not isinstance(params, ConvexConcaveParams):
        params = ConvexConcaveParams(*params)
    q, gam = params.q, params.gamma
    h2 = grid.h ** 2
    lap = laplacian_matrix(n)

    def T(u):
        return second_difference(u) - h2 * u ** gam

    def G(u):
        return h2 * u ** q

    return ParametricProblem(
        n=n,
        eval_T=T,
        eval_G=G,
        grad_T_row=lambda u, i: _laplacian_row(n, i) - _unit_row(n, i, h2 * gam * u[i] ** (gam - 1)),
        grad_G_row=lambda u, i: _unit_row(n, i, h2 * q * u[i] ** (q - 1)),
        feasible=orthant_feasible,
        max_step=orthant_max_step,
        structure_hint=Structure.TRIDIAGONAL,
        bandwidth=1,
        jac_T=lambda u: lap - np.diag(h2 * gam * u ** (gam - 1)),
        jac_G=lambda u: np.diag(h2 * q * u ** (q - 1)),
        name="convex-concave",
        params={"q": q, "gamma": gam},
    )


def convex_concave_f(u, q, gamma):
    """The three displayed ratio formulas, evaluated branch by branch."""
    n = u.size
    h2 = (1.0 / (n + 1)) ** 2
    f = np.empty(n)
    f[0] = (-u[1] + 2 * u[0] - h2 * u[0] ** gamma) / (h2 * u[0] ** q)
    for i in range(1, n - 1):
        f[i] = (-u[i + 1] + 2 * u[i] - u[i - 1] - h2 * u[i] ** gamma) / (h2 * u[i] ** q)
    f[-1] = (2 * u[-1] - u[-2] - h2 * u[-1] ** gamma) / (h2 * u[-1] ** q)
    return f


def make_bratu(n) -> ParametricProblem:
    """-u'' = lam * exp(u) on (0, 1), u(0) = u(1) = 0, second-order differences."""
    grid = Grid1D(n)
    h2 = grid.h ** 2
    lap = laplacian_matrix(n)

    def G(u):
        return h2 * np.exp(u)

    return ParametricProblem(
        n=n,
        eval_T=second_difference,
        eval_G=G,
        grad_T_row=lambda u, i: _laplacian_row(n, i),
        grad_G_row=lambda u, i: _unit_row(n, i, h2 * np.exp(u[i])),
        feasible=orthant_feasible,
        max_step=orthant_max_step,
        structure_hint=Structure.TRIDIAGONAL,
        bandwidth=1,
        jac_T=lambda u: lap,
        jac_G=lambda u: np.diag(h2 * np.exp(u)),
        name="bratu",
        params={},
    )


def bratu_f(u):
    n = u.size
    h2 = (1.0 / (n + 1)) ** 2
    f = np.empty(n)
    f[0] = (-u[1] + 2 * u[0]) / (h2 * np.exp(u[0]))
    for i in range(1, n - 1):
        f[i] = (-u[i + 1] + 2 * u[i] - u[i - 1]) / (h2 * np.exp(u[i]))
    f[-1] = (2 * u[-1] - u[-2]) / (h2 * np.exp(u[-1]))
    return f


def make_linear_perron(A) -> ParametricProblem:
    """T(u) = A u, G(u) = u; the maximin value is the Perron root of A."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidParams("A must be square")
    if not np.all(A > 0):
        raise InvalidParams("A must be entrywise positive")
    n = A.shape[0]
    A.setflags(write=False)
    eye = np.eye(n)
    return ParametricProblem(
        n=n,
        eval_T=lambda u: A @ u,
        eval_G=lambda u: np.array(u, dtype=float),
        grad_T_row=lambda u, i: A[i].copy(),
        grad_G_row=lambda u, i: eye[i].copy(),
        feasible=orthant_feasible,
        max_step=orthant_max_step,
        structure_hint=Structure.DENSE,
        jac_T=lambda u: A,
        jac_G=lambda u: eye,
        name="perron",
        params={"A": A.tolist()},
    )
