"""RBF-ARD kernel and its derivatives."""

from dataclasses import dataclass
from typing import List

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    """Output scale and per-dimension lengthscales of an RBF kernel."""
    output_scale: float
    lengthscales: np.ndarray

    def __post_init__(self):
        lengthscales = np.atleast_1d(np.asarray(self.lengthscales, dtype=float)).copy()
        lengthscales.setflags(write=False)
        object.__setattr__(self, 'lengthscales', lengthscales)
        if not self.output_scale > 0:
            raise ValueError(f"output_scale must be positive, got {self.output_scale}")
        if np.any(lengthscales <= 0):
            raise ValueError(f"lengthscales must be positive, got {lengthscales}")

    @property
    def dim(self) -> int:
        return self.lengthscales.shape[0]


def _as_points(X: np.ndarray, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[-1] != dim:
        raise ValueError(f"Input dimension {X.shape[-1]} does not match kernel dimension {dim}")
    return X


def rbf_kernel(x1: np.ndarray, x2: np.ndarray, params: KernelParams) -> float:
    """
    Evaluate k(x1, x2) = θ0·exp(-½ Σ ((x1_i - x2_i)/ℓ_i)²).

    Raises:
        ValueError: if either point does not match the lengthscale dimension.
    """
    x1 = np.asarray(x1, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x1.shape[0] != params.dim or x2.shape[0] != params.dim:
        raise ValueError(
            f"Point dimensions {x1.shape[0]}, {x2.shape[0]} do not match kernel dimension {params.dim}"
        )
    scaled = (x1 - x2) / params.lengthscales
    return float(params.output_scale * np.exp(-0.5 * np.dot(scaled, scaled)))


def rbf_gram(X1: np.ndarray, X2: np.ndarray, params: KernelParams) -> np.ndarray:
    """Cross-covariance matrix between two point sets."""
    X1 = _as_points(X1, params.dim)
    X2 = _as_points(X2, params.dim)
    A = X1 / params.lengthscales
    B = X2 / params.lengthscales
    sq = (np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)[None, :]
          - 2.0 * A @ B.T)
    np.maximum(sq, 0.0, out=sq)
    return params.output_scale * np.exp(-0.5 * sq)


def rbf_gram_log_grads(X: np.ndarray, params: KernelParams) -> List[np.ndarray]:
    """
    Derivatives of the Gram matrix w.r.t. log θ0 and each log ℓ_i.

    Returns:
        List of d+1 matrices: [dK/dlogθ0, dK/dlogℓ_1, ..., dK/dlogℓ_d]
    """
    X = _as_points(X, params.dim)
    K = rbf_gram(X, X, params)
    grads = [K]
    for i in range(params.dim):
        sq_i = ((X[:, None, i] - X[None, :, i]) / params.lengthscales[i]) ** 2
        grads.append(K * sq_i)
    return grads

