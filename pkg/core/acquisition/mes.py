"""
Max-value entropy search and its cost-weighted multi-fidelity form.

The gain for an observation y = f^(m)(x) + ε given f^(M)(x) ≤ f* is

    ½ρ²·γ·φ(γ)/Φ(γ) + E_q[log Φ(h(z))] - log Φ(γ)

with z the standardized observation, ρ its correlation with f^(M)(x),
γ = (f* - μ_M)/σ_M and h the standardized truncation point of f^(M)
given y. The expectation is taken under the truncated density
q(z) = φ(z)Φ(h(z))/Φ(γ) with a 1-D trapezium rule.
"""

from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import log_ndtr
from scipy.stats import norm

from config.settings import Settings
from core.exceptions import NumericalError
from core.multifidelity.surrogate import MultiFidelitySurrogate, sample_paths

logger = logging.getLogger(__name__)

_RADIUS_EXPONENTS = np.arange(-6, 3)
_CUTOFF = 1e-30
_VARIANCE_FLOOR = 1e-30
_U_RANGE = (-40.0, 8.0)


@dataclass(frozen=True)
class MaxValueSampleSet:
    """Sampled maxima of the target objective over a grid."""
    values: np.ndarray
    grid: np.ndarray
    seed: int

    def __post_init__(self):
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.shape[0] < 1:
            raise ValueError("At least one max-value sample is required")
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return self.values.shape[0]


def sample_max_values(surrogate: MultiFidelitySurrogate, grid: np.ndarray, n_samples: int,
                      seed: int, cap: int = Settings.MFABO_GRID_CAP) -> MaxValueSampleSet:
    """Maxima over `grid` of independent posterior samples of the target fidelity."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    paths = sample_paths(surrogate, grid, surrogate.n_fidelities, n_samples, seed, cap)
    return MaxValueSampleSet(values=paths.max(axis=1), grid=np.asarray(grid), seed=seed)


def _endpoint_radii(integrand, center: np.ndarray, scale: float) -> np.ndarray:
    """
    Smallest R = 10^k, k in {-6..2}, such that the integrand is below the
    cutoff at ±R and at every larger radius of the ladder.
    """
    radii = 10.0 ** _RADIUS_EXPONENTS
    n_levels = len(radii)
    ends = np.concatenate([center[:, None] - scale * radii[None, :],
                           center[:, None] + scale * radii[None, :]], axis=1)
    with np.errstate(over='ignore', invalid='ignore'):
        mags = np.abs(integrand(ends))
    small = (mags[:, :n_levels] < _CUTOFF) & (mags[:, n_levels:] < _CUTOFF)
    tail_small = np.flip(np.cumprod(np.flip(small, axis=1), axis=1), axis=1).astype(bool)
    k_idx = np.where(tail_small.any(axis=1), tail_small.argmax(axis=1), n_levels - 1)
    return radii[k_idx]


def truncated_log_cdf_mean(a: np.ndarray, b: float, log_norm: np.ndarray,
                           intervals: int = Settings.MES_INTERVALS) -> np.ndarray:
    """
    E_q[log Φ(a - b·z)] under q(z) ∝ φ(z)Φ(a - b·z), one value per entry of `a`.

    Integrates in z when |b| ≤ 1 and in u = a - b·z otherwise, so the
    quadrature always resolves the narrower of the two factors.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    log_norm = np.atleast_1d(np.asarray(log_norm, dtype=float))

    if abs(b) <= 1.0:
        def integrand(t):
            lh = log_ndtr(a[:, None] - b * t)
            return norm.pdf(t) * np.exp(np.minimum(lh - log_norm[:, None], 700.0)) * lh
        center, scale = np.zeros_like(a), 1.0
        lo_clip, hi_clip = -np.inf, np.inf
    else:
        def integrand(t):
            lu = log_ndtr(t)
            weight = norm.pdf((a[:, None] - t) / b) / abs(b)
            return weight * np.exp(np.minimum(lu - log_norm[:, None], 700.0)) * lu
        center, scale = a, abs(b)
        lo_clip, hi_clip = _U_RANGE

    R = _endpoint_radii(integrand, center, scale)
    lo = np.maximum(center - scale * R, lo_clip)
    hi = np.minimum(center + scale * R, hi_clip)
    valid = hi > lo
    frac = np.linspace(0.0, 1.0, intervals + 1)
    t = lo[:, None] + np.where(valid, hi - lo, 0.0)[:, None] * frac[None, :]
    values = integrand(t)
    result = np.where(valid, trapezoid(values, t, axis=1), 0.0)
    if not np.all(np.isfinite(result)):
        raise NumericalError("Entropy quadrature produced a non-finite value")
    return result


def mes_gain(mu_m: float, var_m: float, mu_M: float, var_M: float, cov: float,
             noise: float, fstar: np.ndarray, clamp: bool = True,
             intervals: int = Settings.MES_INTERVALS) -> float:
    """
    Mean information gain about f* from observing fidelity m at one point.

    Args:
        mu_m, var_m: posterior moments of f^(m)(x)
        mu_M, var_M: posterior moments of f^(M)(x)
        cov: posterior Cov(f^(m)(x), f^(M)(x)); equals var_M when m = M
        noise: observation noise variance at fidelity m
        fstar: sampled maxima
        clamp: clip the average at zero from below

    Raises:
        NumericalError: when an intermediate is not finite
    """
    fstar = np.atleast_1d(np.asarray(fstar, dtype=float))
    if var_m <= 0 or var_M <= 0:
        return 0.0
    s2 = var_m + noise
    sigma_M = np.sqrt(var_M)
    cond_var = max(var_M - cov ** 2 / s2, _VARIANCE_FLOOR)
    sigma_cond = np.sqrt(cond_var)
    rho2 = min(cov ** 2 / (var_M * s2), 1.0)

    gamma = (fstar - mu_M) / sigma_M
    log_norm = log_ndtr(gamma)
    hazard = np.exp(norm.logpdf(gamma) - log_norm)
    a = gamma * sigma_M / sigma_cond
    b = (cov / np.sqrt(s2)) / sigma_cond

    expected_log = truncated_log_cdf_mean(a, b, log_norm, intervals)
    gains = 0.5 * rho2 * gamma * hazard + expected_log - log_norm
    if not np.all(np.isfinite(gains)):
        raise NumericalError(f"Non-finite information gain at μ={mu_m:.3g}, σ²={var_m:.3g}")
    gain = float(np.mean(gains))
    return max(gain, 0.0) if clamp else gain


def _moments(X: np.ndarray, m: int, surrogate: MultiFidelitySurrogate) -> Tuple[np.ndarray, ...]:
    M = surrogate.n_fidelities
    mu_m, var_m = surrogate.predict_batch(X, m)
    if m == M:
        return mu_m, var_m, mu_m, var_m, var_m
    mu_M, var_M = surrogate.predict_batch(X, M)
    return mu_m, var_m, mu_M, var_M, surrogate.cross_covariance(X, m, M)


def mes(X: np.ndarray, m: int, surrogate: MultiFidelitySurrogate, fstar: MaxValueSampleSet,
        clamp: bool = True) -> np.ndarray:
    """Information gain about the maximum value from querying fidelity m at each row of X."""
    X = np.asarray(X, dtype=float).reshape(-1, surrogate.dim)
    noise = surrogate.noise_variance(m)
    mu_m, var_m, mu_M, var_M, cov = _moments(X, m, surrogate)
    return np.array([
        mes_gain(mu_m[i], var_m[i], mu_M[i], var_M[i], cov[i], noise, fstar.values, clamp)
        for i in range(X.shape[0])
    ])


def mf_mes_score(X: np.ndarray, m: int, surrogate: MultiFidelitySurrogate,
                 fstar: MaxValueSampleSet, cost: float) -> np.ndarray:
    """Information gain per unit cost."""
    if not cost > 0:
        raise ValueError(f"Cost must be positive, got {cost}")
    return mes(X, m, surrogate, fstar) / cost
