"""Quasi-direction of steepest ascent from the bordered system [[Gamma, -1], [1^T, 0]] t = (0, 1)."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import SingularSystem
from .problem import GradientMatrix


@dataclass(frozen=True)
class BorderedSystem:
    M: np.ndarray
    q: np.ndarray

    @classmethod
    def from_gram(cls, Gamma):
        N = Gamma.shape[0]
        M = np.zeros((N + 1, N + 1))
        M[:N, :N] = Gamma
        M[:N, N] = -1.0
        M[N, :N] = 1.0
        q = np.zeros(N + 1)
        q[N] = 1.0
        return cls(M=M, q=q)


@dataclass(frozen=True)
class QuasiDirection:
    alpha: np.ndarray
    delta: float
    Y: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None
    residual: float = field(default=0.0, compare=False)


class Kind(enum.Enum):
    ALL_POSITIVE = "AllPositive"
    MIXED = "Mixed"
    DELTA_ZERO = "DeltaZero"


@dataclass(frozen=True)
class Classification:
    kind: Kind
    neg_indices: tuple = ()


def delta_zero_tol(Gamma):
    return 1e-12 * (1.0 + np.linalg.norm(Gamma, np.inf))


def solve_bordered(Gamma) -> QuasiDirection:
    Gamma = np.asarray(Gamma, dtype=float)
    N = Gamma.shape[0]
    # Factor with Gamma scaled to unit norm so the border row can act as a pivot;
    # otherwise a near-singular Gamma block yields tiny pivots for a regular M.
    s = np.linalg.norm(Gamma, np.inf)
    if s == 0.0:
        s = 1.0
    scaled = BorderedSystem.from_gram(Gamma / s)
    with warnings.catch_warnings():
        # singularity is judged by the pivot test below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(scaled.M, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < 1e-14 * (1.0 + np.linalg.norm(scaled.M, np.inf)):
        raise SingularSystem("bordered matrix is numerically singular")
    t = scipy.linalg.lu_solve((lu, piv), scaled.q, check_finite=False)
    t[N] *= s
    system = BorderedSystem.from_gram(Gamma)
    residual = float(np.max(np.abs(system.M @ t - system.q)))
    return QuasiDirection(alpha=t[:N], delta=float(t[N]), residual=residual)


def quasi_direction(A, qd: QuasiDirection) -> QuasiDirection:
    rows = A.rows if isinstance(A, GradientMatrix) else np.asarray(A, dtype=float)
    Y = rows.T @ qd.alpha
    norm = float(np.linalg.norm(Y))
    scale = 1.0 + float(np.max(np.abs(rows))) if rows.size else 1.0
    y = Y / norm if norm > 1e-14 * scale else None
    return QuasiDirection(alpha=qd.alpha, delta=qd.delta, Y=Y, y=y, residual=qd.residual)


def classify(qd: QuasiDirection, tol=1e-12) -> Classification:
    if qd.delta <= tol:
        return Classification(Kind.DELTA_ZERO)
    neg = tuple(int(k) for k in np.flatnonzero(qd.alpha <= 0))
    if neg:
        return Classification(Kind.MIXED, neg)
    return Classification(Kind.ALL_POSITIVE)
