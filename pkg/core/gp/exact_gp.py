"""Exact Gaussian-process regression with Cholesky-based inference."""

from dataclasses import dataclass, field
from typing import Tuple
import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from config.settings import Settings
from core.exceptions import NumericalError
from core.gp.kernels import KernelParams, rbf_gram, rbf_gram_log_grads

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GPHyperparams:
    """
    Kernel, Gaussian likelihood noise and constant prior mean.

    noise_variance must be positive. Noiseless observations are modelled
    with a tiny floor such as 1e-10; any remaining ill-conditioning is
    absorbed by the jitter ladder of `stable_cholesky`.
    """
    kernel: KernelParams
    noise_variance: float
    mean_constant: float = 0.0

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise ValueError(f"noise_variance must be positive, got {self.noise_variance}")


@dataclass(frozen=True)
class HyperPriorBox:
    """Support of a smoothed box prior."""
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"Box lower bound {self.lower} must be below upper bound {self.upper}")

    def project(self, value: float) -> float:
        return float(np.clip(value, self.lower, self.upper))


def stable_cholesky(K: np.ndarray, scale: float = 1.0) -> Tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of a symmetric matrix with graded jitter.

    The plain matrix is tried first; on failure the diagonal is inflated by
    JITTER_START·scale, multiplied by 10 up to JITTER_CEILING·scale.

    Returns:
        (L, jitter) where jitter is the diagonal amount that was added

    Raises:
        NumericalError: when every jitter level fails
    """
    n = K.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    scale = max(float(scale), 1e-12)
    jitter = 0.0
    next_jitter = Settings.JITTER_START * scale
    while True:
        try:
            L = cholesky(K + jitter * np.eye(n), lower=True, check_finite=True)
            if np.all(np.diag(L) > 0):
                if jitter > 0:
                    logger.warning(f"Cholesky needed jitter {jitter:.1e} on a {n}x{n} matrix")
                return L, jitter
        except (LinAlgError, ValueError):
            pass
        if next_jitter > Settings.JITTER_CEILING * scale * (1 + 1e-9):
            break
        jitter = next_jitter
        next_jitter *= 10.0
    try:
        condition = float(np.linalg.cond(K))
    except LinAlgError:
        condition = float('inf')
    raise NumericalError(
        f"Covariance factorization failed for a {n}x{n} matrix (condition {condition:.2e})",
        jitter=jitter,
        condition=condition,
    )


@dataclass(frozen=True)
class PosteriorGP:
    """A fitted GP: training data plus the factor of K + η²I."""
    X: np.ndarray
    y: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray
    hyperparams: GPHyperparams
    jitter: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def dim(self) -> int:
        return self.hyperparams.kernel.dim


def _as_training_arrays(X, y, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float).reshape(-1, dim)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} inputs but {y.shape[0]} targets")
    return X, y


def fit_posterior(X, y, hyperparams: GPHyperparams) -> PosteriorGP:
    """Condition the GP prior on data with fixed hyperparameters."""
    X, y = _as_training_arrays(X, y, hyperparams.kernel.dim)
    K = rbf_gram(X, X, hyperparams.kernel) + hyperparams.noise_variance * np.eye(len(y))
    L, jitter = stable_cholesky(K, hyperparams.kernel.output_scale)
    alpha = cho_solve((L, True), y - hyperparams.mean_constant) if len(y) else np.zeros(0)
    return PosteriorGP(X=X, y=y, chol=L, alpha=alpha, hyperparams=hyperparams, jitter=jitter)


def predict_batch(model: PosteriorGP, Xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and latent variance at many points."""
    hp = model.hyperparams
    Xs = np.asarray(Xs, dtype=float).reshape(-1, hp.kernel.dim)
    prior_var = np.full(Xs.shape[0], hp.kernel.output_scale)
    if model.n == 0:
        return np.full(Xs.shape[0], hp.mean_constant), prior_var
    Ks = rbf_gram(Xs, model.X, hp.kernel)
    mean = hp.mean_constant + Ks @ model.alpha
    V = solve_triangular(model.chol, Ks.T, lower=True)
    var = prior_var - np.sum(V ** 2, axis=0)
    return mean, np.maximum(var, 0.0)


def posterior_predict(model: PosteriorGP, x: np.ndarray) -> Tuple[float, float]:
    """
    Posterior mean and variance at a single point.

    Returns:
        (mean, variance) with the variance clamped at zero
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != model.dim:
        raise ValueError(f"Point dimension {x.shape[0]} does not match model dimension {model.dim}")
    mean, var = predict_batch(model, x[None, :])
    return float(mean[0]), float(var[0])


def posterior_covariance(model: PosteriorGP, Xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Joint posterior mean vector and covariance matrix at Xs."""
    hp = model.hyperparams
    Xs = np.asarray(Xs, dtype=float).reshape(-1, hp.kernel.dim)
    Kss = rbf_gram(Xs, Xs, hp.kernel)
    if model.n == 0:
        return np.full(Xs.shape[0], hp.mean_constant), Kss
    Ks = rbf_gram(Xs, model.X, hp.kernel)
    V = solve_triangular(model.chol, Ks.T, lower=True)
    return hp.mean_constant + Ks @ model.alpha, Kss - V.T @ V


def log_marginal_likelihood(X, y, hyperparams: GPHyperparams) -> float:
    """
    log p(y | X, θ) = -½log|K+η²I| - ½(y-μ0)ᵀ(K+η²I)⁻¹(y-μ0) - (N/2)log 2π.

    Raises:
        ValueError: on empty data
        NumericalError: if K + η²I cannot be factorized
    """
    value, _ = log_marginal_likelihood_grad(X, y, hyperparams, with_grad=False)
    return value


def log_marginal_likelihood_grad(X, y, hyperparams: GPHyperparams,
                                 with_grad: bool = True) -> Tuple[float, np.ndarray]:
    """
    Marginal log-likelihood and its gradient via the trace identity.

    The gradient is ordered as [log θ0, log ℓ_1..ℓ_d, log η², μ0].
    """
    X, y = _as_training_arrays(X, y, hyperparams.kernel.dim)
    n = len(y)
    if n == 0:
        raise ValueError("Marginal likelihood needs at least one observation")
    K = rbf_gram(X, X, hyperparams.kernel) + hyperparams.noise_variance * np.eye(n)
    L, _ = stable_cholesky(K, hyperparams.kernel.output_scale)
    r = y - hyperparams.mean_constant
    alpha = cho_solve((L, True), r)
    value = (-np.sum(np.log(np.diag(L))) - 0.5 * float(r @ alpha)
             - 0.5 * n * np.log(2 * np.pi))
    if not with_grad:
        return float(value), np.zeros(0)

    Q = np.outer(alpha, alpha) - cho_solve((L, True), np.eye(n))
    grads = [0.5 * np.sum(Q * dK) for dK in rbf_gram_log_grads(X, hyperparams.kernel)]
    grads.append(0.5 * hyperparams.noise_variance * np.trace(Q))
    grads.append(float(np.sum(alpha)))
    return float(value), np.asarray(grads)


def posterior_gradient_mean(model: PosteriorGP, x: np.ndarray) -> np.ndarray:
    """Gradient of the posterior mean, μ_∇(x) = ∂K_{*,t}(x) (K+η²I)⁻¹ (y - μ0)."""
    x = np.asarray(x, dtype=float).ravel()
    return posterior_gradient_mean_batch(model, x[None, :])[0]


def posterior_gradient_mean_batch(model: PosteriorGP, Xs: np.ndarray) -> np.ndarray:
    """Posterior mean gradients at many points, shape (n, d)."""
    Xs = np.asarray(Xs, dtype=float).reshape(-1, model.dim)
    if model.n == 0:
        return np.zeros_like(Xs)
    kernel = model.hyperparams.kernel
    W = rbf_gram(Xs, model.X, kernel) * model.alpha[None, :]
    return -(W.sum(axis=1)[:, None] * Xs - W @ model.X) / kernel.lengthscales ** 2


def with_targets(model: PosteriorGP, y: np.ndarray) -> PosteriorGP:
    """Same inputs and factorization, new targets."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != model.n:
        raise ValueError(f"Expected {model.n} targets, got {y.shape[0]}")
    alpha = cho_solve((model.chol, True), y - model.hyperparams.mean_constant) if model.n else y
    return PosteriorGP(X=model.X, y=y, chol=model.chol, alpha=alpha,
                       hyperparams=model.hyperparams, jitter=model.jitter)
