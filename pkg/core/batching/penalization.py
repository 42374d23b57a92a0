"""Hard local penalization of an acquisition around pending queries."""

from dataclasses import dataclass
from typing import Optional, Sequence
import logging

import numpy as np

from config.settings import Settings
from core.domain import Domain, GridDomain
from core.exceptions import EstimationError
from core.multifidelity.surrogate import FidelityDataset, MultiFidelitySurrogate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PenalizerParams:
    """Lipschitz constant and maximum-value estimates for one pending point."""
    lipschitz: float
    max_value: float
    local: bool = False

    def __post_init__(self):
        if not self.lipschitz > 0:
            raise ValueError(f"Lipschitz estimate must be positive, got {self.lipschitz}")


@dataclass(frozen=True)
class LocalPenalizer:
    """ψ(x) = min{‖x - center‖ / radius, 1}; radius 0 excludes only the center itself."""
    center: np.ndarray
    radius: float

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        dist = np.linalg.norm(X - self.center[None, :], axis=1)
        if self.radius <= 0:
            return np.where(dist == 0, 0.0, 1.0)
        return np.minimum(dist / self.radius, 1.0)


def exclusion_radius(mean_j: float, std_j: float, params: PenalizerParams) -> float:
    """E[r_j] + σ(x_j)/L̂ with E[r_j] = max(P̂ - μ(x_j), 0)/L̂."""
    expected = max(params.max_value - mean_j, 0.0) / params.lipschitz
    return expected + max(std_j, 0.0) / params.lipschitz


def build_penalizer(x_j: np.ndarray, surrogate: MultiFidelitySurrogate, params: PenalizerParams,
                    m: Optional[int] = None) -> LocalPenalizer:
    m = m or surrogate.n_fidelities
    x_j = np.asarray(x_j, dtype=float).ravel()
    mean, var = surrogate.predict_batch(x_j[None, :], m)
    radius = exclusion_radius(float(mean[0]), float(np.sqrt(var[0])), params)
    if radius <= 0:
        logger.debug("Degenerate exclusion ball; penalizing the pending point only")
    return LocalPenalizer(center=x_j, radius=radius)


def hard_penalizer(x: np.ndarray, x_j: np.ndarray, surrogate: MultiFidelitySurrogate,
                   params: PenalizerParams, m: Optional[int] = None) -> np.ndarray:
    """Penalty factor in [0, 1] at each row of x for the pending point x_j."""
    return build_penalizer(x_j, surrogate, params, m)(x)


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def penalized_acquisition(scores: np.ndarray, X: np.ndarray, penalizers: Sequence[LocalPenalizer],
                          positive: bool) -> np.ndarray:
    """
    g(α(x))·Π ψ_j(x), with g the identity for positive acquisitions and
    g(z) = log(1 + e^z) otherwise.
    """
    values = np.asarray(scores, dtype=float) if positive else softplus(scores)
    for penalizer in penalizers:
        values = values * penalizer(X)
    return values


def _local_screen(domain: Domain, center: np.ndarray, half_width: float,
                  rng: np.random.Generator) -> np.ndarray:
    lo = np.clip(center - half_width, 0.0, 1.0)
    hi = np.clip(center + half_width, 0.0, 1.0)
    if isinstance(domain, GridDomain):
        inside = np.all((domain.points >= lo) & (domain.points <= hi), axis=1)
        return domain.points[inside] if inside.any() else center[None, :]
    n = Settings.LOCAL_POINTS_PER_DIM * domain.dim
    return lo + (hi - lo) * rng.random((n, domain.dim))


def _global_screen(domain: Domain, rng: np.random.Generator) -> np.ndarray:
    if isinstance(domain, GridDomain):
        return domain.points
    return domain.sample(Settings.GLOBAL_POINTS_PER_DIM * domain.dim, rng)


def estimate_penalizer_params(surrogate: MultiFidelitySurrogate, data: FidelityDataset,
                              x_j: np.ndarray, local: bool, domain: Domain,
                              rng: np.random.Generator, m: Optional[int] = None,
                              max_estimator: str = 'max_y') -> PenalizerParams:
    """
    P̂ is the best observation at fidelity m (or the largest posterior mean on
    the global screen); L̂ is the largest posterior-mean gradient norm over a
    global screen or a box of half-width LOCAL_HALF_WIDTH around x_j.

    Raises:
        EstimationError: when fidelity m has no observations
    """
    m = m or surrogate.n_fidelities
    best = data.best(m)
    if best is None:
        raise EstimationError(f"No observations at fidelity {m} to estimate the maximum from")
    x_j = np.asarray(x_j, dtype=float).ravel()

    screen = (_local_screen(domain, x_j, Settings.LOCAL_HALF_WIDTH, rng) if local
              else _global_screen(domain, rng))
    norms = np.linalg.norm(surrogate.gradient_mean(screen, m), axis=1)
    lipschitz = max(float(norms.max()) if norms.size else 0.0, Settings.LIPSCHITZ_FLOOR)

    if max_estimator == 'posterior_mean':
        mean, _ = surrogate.predict_batch(_global_screen(domain, rng), m)
        max_value = float(mean.max())
    elif max_estimator == 'max_y':
        max_value = float(best)
    else:
        raise ValueError(f"Unknown max estimator '{max_estimator}'")
    return PenalizerParams(lipschitz=lipschitz, max_value=max_value, local=local)
