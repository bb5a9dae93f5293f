"""Least-squares residual on the Stiefel manifold.

With the bias eliminated the problem is

    minimize  f(W) = ||W^T A - B||_F^2   subject to  W^T W = I_k

where ``A`` and ``B`` are the row-centred feature and one-hot label matrices.
Row-centring is the action of ``H = I - 11^T/n`` on the right, so ``H`` is
never formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import OneHotLabels
from .errors import DimensionError, NumericalError

STIEFEL_TOL = 1e-8


@dataclass(frozen=True)
class CenteredProblem:
    """Centred data with cached Gram products.

    Attributes
    ----------
    A : ndarray (d, n)
        Row-centred features.
    B : ndarray (k, n)
        Row-centred one-hot labels.
    gram_AA : ndarray (d, d)
        ``A @ A.T``.
    cross_AB : ndarray (d, k)
        ``A @ B.T``.
    sq_norm_B : float
        ``||B||_F^2``.
    """

    A: np.ndarray
    B: np.ndarray
    gram_AA: np.ndarray
    cross_AB: np.ndarray
    sq_norm_B: float

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def k(self) -> int:
        return self.B.shape[0]

    def scaled(self, a: float = 1.0, b: float = 1.0) -> "CenteredProblem":
        """Problem with ``A`` scaled by ``a`` and ``B`` by ``b``."""
        return problem_from_centered(a * self.A, b * self.B)


def _ro(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def problem_from_centered(A, B) -> CenteredProblem:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    gram = A @ A.T
    gram = 0.5 * (gram + gram.T)
    return CenteredProblem(_ro(A), _ro(B), _ro(gram), _ro(A @ B.T), float(np.sum(B * B)))


def build_problem(X, Y) -> CenteredProblem:
    """Centre ``X`` (d x n) and ``Y`` (k x n or OneHotLabels) and cache Grams."""
    if isinstance(Y, OneHotLabels):
        Y = Y.matrix
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != Y.shape[1]:
        raise DimensionError(f"X {X.shape} and Y {Y.shape} must share the sample axis")
    d, k = X.shape[0], Y.shape[0]
    if d < k:
        raise DimensionError(
            f"d={d} < k={k}: no d x k matrix has orthonormal columns (W^T W = I_k needs d >= k)"
        )
    A = X - X.mean(axis=1, keepdims=True)
    B = Y - Y.mean(axis=1, keepdims=True)
    return problem_from_centered(A, B)


def objective_value(p: CenteredProblem, W) -> float:
    """``||W^T A - B||_F^2`` from the cached Gram products."""
    AAW = p.gram_AA @ W
    val = np.sum(W * AAW) - 2.0 * np.sum(W * p.cross_AB) + p.sq_norm_B
    return max(float(val), 0.0)


def objective_direct(p: CenteredProblem, W) -> float:
    """Same value evaluated on the full residual; O(dkn)."""
    R = W.T @ p.A - p.B
    return float(np.sum(R * R))


def gradient(p: CenteredProblem, W) -> np.ndarray:
    """Euclidean gradient ``2 (A A^T W - A B^T)``."""
    return 2.0 * (p.gram_AA @ W - p.cross_AB)


def riemannian_gradient(W, G) -> np.ndarray:
    """Tangent projection ``G - W G^T W`` used in the stopping test and BB pairs."""
    return G - W @ (G.T @ W)


def recover_bias(p: CenteredProblem, W, X, Y) -> np.ndarray:
    """Optimal bias at fixed ``W``: ``(Y 1 - W^T X 1) / n``."""
    if isinstance(Y, OneHotLabels):
        Y = Y.matrix
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    n = X.shape[1]
    return (Y.sum(axis=1) - W.T @ X.sum(axis=1)) / n


def orthonormality_error(W) -> float:
    k = W.shape[1]
    return float(np.linalg.norm(W.T @ W - np.eye(k)))


def check_stiefel(W, tol: float = STIEFEL_TOL) -> np.ndarray:
    err = orthonormality_error(W)
    if not np.isfinite(err) or err > tol:
        raise NumericalError(f"||W^T W - I||_F = {err:.3e} exceeds {tol:.1e}")
    return W
