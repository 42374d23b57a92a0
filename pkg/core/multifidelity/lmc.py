"""Linear model of coregionalization: Σ_w k_w(x, x')·B_w[m, m']."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from core.gp.exact_gp import HyperPriorBox, stable_cholesky
from core.gp.kernels import KernelParams, rbf_gram
from core.gp.training import Objective, box_penalty

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LMCParams:
    """Latent RBF kernels and their coregionalization factors B_w = A_wA_wᵀ + diag(v_w)."""
    kernels: Tuple[KernelParams, ...]
    A: Tuple[np.ndarray, ...]
    v: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, 'kernels', tuple(self.kernels))
        object.__setattr__(self, 'A', tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in self.A))
        object.__setattr__(self, 'v', tuple(np.asarray(v, dtype=float).ravel() for v in self.v))
        if len(self.kernels) < 1:
            raise ValueError("LMC needs at least one latent kernel")
        if not len(self.kernels) == len(self.A) == len(self.v):
            raise ValueError("kernels, A and v must have one entry per latent kernel")
        n_fid = self.A[0].shape[0]
        for a, v in zip(self.A, self.v):
            if a.shape[0] != n_fid or v.shape[0] != n_fid:
                raise ValueError("Every coregionalization factor must have one row per fidelity")
            if a.shape[1] > n_fid:
                raise ValueError(f"Rank {a.shape[1]} exceeds the number of fidelities {n_fid}")
            if np.any(v < 0):
                raise ValueError("Diagonal lifts v_w must be nonnegative")
        dims = {k.dim for k in self.kernels}
        if len(dims) != 1:
            raise ValueError(f"Latent kernels disagree on input dimension: {dims}")

    @property
    def n_latent(self) -> int:
        return len(self.kernels)

    @property
    def n_fidelities(self) -> int:
        return self.A[0].shape[0]

    @property
    def rank(self) -> int:
        return self.A[0].shape[1]

    @property
    def dim(self) -> int:
        return self.kernels[0].dim

    def coregionalization(self, w: int) -> np.ndarray:
        return self.A[w] @ self.A[w].T + np.diag(self.v[w])


def _check_fidelity(m: int, n_fidelities: int):
    if not 1 <= int(m) <= n_fidelities:
        raise ValueError(f"Fidelity {m} outside 1..{n_fidelities}")


def lmc_kernel(x1: np.ndarray, m1: int, x2: np.ndarray, m2: int, params: LMCParams) -> float:
    """Σ_w k_w(x1, x2)·(B_w)_{m1,m2} for 1-based fidelity indices."""
    x1 = np.asarray(x1, dtype=float).ravel()
    x2 = np.asarray(x2, dtype=float).ravel()
    if x1.shape[0] != params.dim or x2.shape[0] != params.dim:
        raise ValueError(f"Point dimensions {x1.shape[0]}, {x2.shape[0]} do not match {params.dim}")
    _check_fidelity(m1, params.n_fidelities)
    _check_fidelity(m2, params.n_fidelities)
    total = 0.0
    for w, kernel in enumerate(params.kernels):
        total += rbf_gram(x1, x2, kernel)[0, 0] * params.coregionalization(w)[m1 - 1, m2 - 1]
    return float(total)


def lmc_gram(X1: np.ndarray, f1: np.ndarray, X2: np.ndarray, f2: np.ndarray,
             params: LMCParams) -> np.ndarray:
    """Covariance matrix between stacked (input, fidelity) pairs."""
    f1 = np.asarray(f1, dtype=int).ravel() - 1
    f2 = np.asarray(f2, dtype=int).ravel() - 1
    K = np.zeros((f1.shape[0], f2.shape[0]))
    for w, kernel in enumerate(params.kernels):
        B = params.coregionalization(w)
        K += rbf_gram(X1, X2, kernel) * B[np.ix_(f1, f2)]
    return K


def lmc_prior_variance(params: LMCParams, m: int) -> float:
    return float(sum(k.output_scale * params.coregionalization(w)[m - 1, m - 1]
                     for w, k in enumerate(params.kernels)))


@dataclass(frozen=True)
class MultiTaskPosterior:
    """Exact GP posterior over stacked (input, fidelity) pairs."""
    X: np.ndarray
    fidelities: np.ndarray
    y: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray
    params: LMCParams
    noise: np.ndarray
    mean_constant: float = 0.0
    jitter: float = field(default=0.0)

    @property
    def n(self) -> int:
        return self.y.shape[0]


def fit_multitask_posterior(X, fidelities, y, params: LMCParams, noise: np.ndarray,
                            mean_constant: float = 0.0) -> MultiTaskPosterior:
    """Condition the LMC prior on stacked data with fixed hyperparameters."""
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float).reshape(len(y), params.dim)
    fidelities = np.asarray(fidelities, dtype=int).ravel()
    noise = np.asarray(noise, dtype=float).ravel()
    K = lmc_gram(X, fidelities, X, fidelities, params) + np.diag(noise[fidelities - 1])
    scale = max(lmc_prior_variance(params, m) for m in range(1, params.n_fidelities + 1))
    L, jitter = stable_cholesky(K, scale)
    alpha = cho_solve((L, True), y - mean_constant) if len(y) else np.zeros(0)
    return MultiTaskPosterior(X=X, fidelities=fidelities, y=y, chol=L, alpha=alpha,
                              params=params, noise=noise, mean_constant=mean_constant,
                              jitter=jitter)


def multitask_joint_covariance(post: MultiTaskPosterior, Xs: np.ndarray,
                               fs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Joint posterior mean and covariance of latent values at (Xs, fs)."""
    Xs = np.asarray(Xs, dtype=float).reshape(-1, post.params.dim)
    fs = np.asarray(fs, dtype=int).ravel()
    Kss = lmc_gram(Xs, fs, Xs, fs, post.params)
    if post.n == 0:
        return np.full(Xs.shape[0], post.mean_constant), Kss
    Ks = lmc_gram(Xs, fs, post.X, post.fidelities, post.params)
    V = solve_triangular(post.chol, Ks.T, lower=True)
    return post.mean_constant + Ks @ post.alpha, Kss - V.T @ V


def multitask_predict(post: MultiTaskPosterior, Xs: np.ndarray,
                      m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and latent variance at fidelity m."""
    _check_fidelity(m, post.params.n_fidelities)
    Xs = np.asarray(Xs, dtype=float).reshape(-1, post.params.dim)
    prior_var = np.full(Xs.shape[0], lmc_prior_variance(post.params, m))
    if post.n == 0:
        return np.full(Xs.shape[0], post.mean_constant), prior_var
    fs = np.full(Xs.shape[0], m)
    Ks = lmc_gram(Xs, fs, post.X, post.fidelities, post.params)
    V = solve_triangular(post.chol, Ks.T, lower=True)
    mean = post.mean_constant + Ks @ post.alpha
    return mean, np.maximum(prior_var - np.sum(V ** 2, axis=0), 0.0)


def multitask_cross_covariance(post: MultiTaskPosterior, Xs: np.ndarray,
                               m1: int, m2: int) -> np.ndarray:
    """Posterior Cov(f^(m1)(x), f^(m2)(x)) at each point of Xs."""
    Xs = np.asarray(Xs, dtype=float).reshape(-1, post.params.dim)
    prior = sum(k.output_scale * post.params.coregionalization(w)[m1 - 1, m2 - 1]
                for w, k in enumerate(post.params.kernels))
    cov = np.full(Xs.shape[0], float(prior))
    if post.n == 0:
        return cov
    n = Xs.shape[0]
    K1 = lmc_gram(Xs, np.full(n, m1), post.X, post.fidelities, post.params)
    K2 = lmc_gram(Xs, np.full(n, m2), post.X, post.fidelities, post.params)
    V1 = solve_triangular(post.chol, K1.T, lower=True)
    V2 = solve_triangular(post.chol, K2.T, lower=True)
    return cov - np.sum(V1 * V2, axis=0)


def multitask_gradient_mean(post: MultiTaskPosterior, Xs: np.ndarray, m: int) -> np.ndarray:
    """Gradient of the fidelity-m posterior mean w.r.t. the input, shape (n, d)."""
    Xs = np.asarray(Xs, dtype=float).reshape(-1, post.params.dim)
    grad = np.zeros_like(Xs)
    if post.n == 0:
        return grad
    for w, kernel in enumerate(post.params.kernels):
        B_col = post.params.coregionalization(w)[m - 1, post.fidelities - 1]
        W = rbf_gram(Xs, post.X, kernel) * (B_col * post.alpha)[None, :]
        grad -= (W.sum(axis=1)[:, None] * Xs - W @ post.X) / kernel.lengthscales ** 2
    return grad


class LMCParameterCodec:
    """
    Packs LMC hyperparameters as
    [log ℓ_w (W·d), A_w (W·M·r), log v_w (W·M), log η²_m (M), μ0].

    Latent kernel output scales are fixed at 1; B_w carries the scale.
    """

    def __init__(self, n_fidelities: int, dim: int, n_latent: int, rank: int,
                 boxes: Dict[str, HyperPriorBox]):
        self.M, self.d, self.W, self.r = n_fidelities, dim, n_latent, rank
        n_ls, n_a, n_v = n_latent * dim, n_latent * n_fidelities * rank, n_latent * n_fidelities
        ls, noise, mean = boxes['lengthscale'], boxes['noise'], boxes['mean_constant']
        self.lower = np.concatenate([np.full(n_ls, np.log(ls.lower)), np.full(n_a, -np.inf),
                                     np.full(n_v, -np.inf), np.full(n_fidelities, np.log(noise.lower)),
                                     [mean.lower]])
        self.upper = np.concatenate([np.full(n_ls, np.log(ls.upper)), np.full(n_a, np.inf),
                                     np.full(n_v, np.inf), np.full(n_fidelities, np.log(noise.upper)),
                                     [mean.upper]])
        self._slices = {}
        start = 0
        for name, size in (('ls', n_ls), ('A', n_a), ('v', n_v), ('noise', n_fidelities), ('mean', 1)):
            self._slices[name] = slice(start, start + size)
            start += size
        self.size = start

    def pack(self, params: LMCParams, noise: np.ndarray, mean_constant: float) -> np.ndarray:
        return np.concatenate([
            np.log(np.concatenate([k.lengthscales for k in params.kernels])),
            np.concatenate([a.ravel() for a in params.A]),
            np.log(np.maximum(np.concatenate(params.v), 1e-12)),
            np.log(noise),
            [mean_constant],
        ])

    def unpack(self, theta: np.ndarray) -> Tuple[LMCParams, np.ndarray, float]:
        ls = np.exp(theta[self._slices['ls']]).reshape(self.W, self.d)
        A = theta[self._slices['A']].reshape(self.W, self.M, self.r)
        v = np.exp(theta[self._slices['v']]).reshape(self.W, self.M)
        params = LMCParams(kernels=tuple(KernelParams(1.0, ls[w]) for w in range(self.W)),
                           A=tuple(A[w] for w in range(self.W)),
                           v=tuple(v[w] for w in range(self.W)))
        noise = np.exp(theta[self._slices['noise']])
        return params, noise, float(theta[self._slices['mean']][0])

    def project(self, theta: np.ndarray) -> np.ndarray:
        return np.clip(theta, self.lower, self.upper)

    def penalty_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper


def lmc_log_marginal_likelihood_grad(X: np.ndarray, fidelities: np.ndarray, y: np.ndarray,
                                     params: LMCParams, noise: np.ndarray,
                                     mean_constant: float) -> Tuple[float, np.ndarray]:
    """Marginal log-likelihood of stacked data and its gradient in codec coordinates."""
    n = len(y)
    f_idx = np.asarray(fidelities, dtype=int) - 1
    onehot = np.zeros((n, params.n_fidelities))
    onehot[np.arange(n), f_idx] = 1.0

    latent = [rbf_gram(X, X, kernel) for kernel in params.kernels]
    Bs = [params.coregionalization(w) for w in range(params.n_latent)]
    K = sum(k * B[np.ix_(f_idx, f_idx)] for k, B in zip(latent, Bs))
    K = K + np.diag(noise[f_idx])
    L, _ = stable_cholesky(K, max(float(np.max(np.diag(K))), 1e-6))
    r = y - mean_constant
    alpha = cho_solve((L, True), r)
    value = -np.sum(np.log(np.diag(L))) - 0.5 * float(r @ alpha) - 0.5 * n * np.log(2 * np.pi)

    Q = np.outer(alpha, alpha) - cho_solve((L, True), np.eye(n))
    g_ls, g_A, g_v = [], [], []
    for w, kernel in enumerate(params.kernels):
        H = Q * latent[w]
        G = H * Bs[w][np.ix_(f_idx, f_idx)]
        row = G.sum(axis=1)
        # Σ_ij G_ij (x_il - x_jl)² for symmetric G
        sq_sum = 2.0 * (row @ X ** 2) - 2.0 * np.sum(X * (G @ X), axis=0)
        g_ls.append(0.5 * sq_sum / kernel.lengthscales ** 2)
        T = onehot.T @ H @ onehot
        g_A.append((T @ params.A[w]).ravel())
        g_v.append(0.5 * np.diag(T) * params.v[w])
    g_noise = 0.5 * noise * (onehot.T @ np.diag(Q))
    grad = np.concatenate([np.concatenate(g_ls), np.concatenate(g_A), np.concatenate(g_v),
                           g_noise, [np.sum(alpha)]])
    return float(value), grad


def lmc_objective(X, fidelities, y, codec: LMCParameterCodec, weight: float) -> Objective:
    lower, upper = codec.penalty_bounds()
    finite = np.isfinite(lower)

    def objective(theta: np.ndarray) -> Tuple[float, np.ndarray]:
        params, noise, mean = codec.unpack(theta)
        value, grad = lmc_log_marginal_likelihood_grad(X, fidelities, y, params, noise, mean)
        penalty, penalty_grad = box_penalty(theta[finite], lower[finite], upper[finite], weight)
        full_grad = np.zeros_like(theta)
        full_grad[finite] = penalty_grad
        return value - penalty, grad - full_grad
    return objective


def default_lmc_params(n_fidelities: int, dim: int, n_latent: Optional[int] = None,
                       rank: Optional[int] = None, lengthscales: Optional[Sequence[float]] = None,
                       output_scale: float = 1.0, seed: int = 0) -> LMCParams:
    """
    Starting LMC parameters with W = 2M latent kernels of rank M.

    Coregionalization factors start strongly correlated with a small seeded
    perturbation; each latent kernel gets a distinct lengthscale multiple.
    """
    W = n_latent or 2 * n_fidelities
    r = rank or n_fidelities
    rng = np.random.default_rng(seed)
    base = np.full(dim, 0.2) if lengthscales is None else np.asarray(lengthscales, dtype=float)
    kernels: List[KernelParams] = []
    A: List[np.ndarray] = []
    v: List[np.ndarray] = []
    for w in range(W):
        factor = 0.75 + 0.5 * w / max(W - 1, 1)
        kernels.append(KernelParams(1.0, np.clip(base * factor, 0.025, 0.6)))
        A.append(np.sqrt(output_scale / (W * r)) * (1.0 + 0.05 * rng.standard_normal((n_fidelities, r))))
        v.append(np.full(n_fidelities, 0.05 * output_scale / W))
    return LMCParams(kernels=tuple(kernels), A=tuple(A), v=tuple(v))


def multitask_with_targets(post: MultiTaskPosterior, y: np.ndarray) -> MultiTaskPosterior:
    """Same stacked inputs and factorization, new targets."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != post.n:
        raise ValueError(f"Expected {post.n} targets, got {y.shape[0]}")
    alpha = cho_solve((post.chol, True), y - post.mean_constant) if post.n else y
    return MultiTaskPosterior(X=post.X, fidelities=post.fidelities, y=y, chol=post.chol,
                              alpha=alpha, params=post.params, noise=post.noise,
                              mean_constant=post.mean_constant, jitter=post.jitter)
