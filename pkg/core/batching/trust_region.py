"""A single TuRBO-style trust region driven by target-fidelity observations."""

from dataclasses import dataclass, field, replace
from typing import Optional
import logging
import math

import numpy as np
from scipy.stats import qmc

from config.settings import Settings
from core.domain import Domain, GridDomain
from core.exceptions import TrustRegionError
from core.multifidelity.surrogate import MultiFidelitySurrogate
from core.batching.thompson import thompson_select

logger = logging.getLogger(__name__)

EDGE_INIT = 0.8
EDGE_MIN = 2.0 ** -7
EDGE_MAX = 1.6
SUCCESS_TOLERANCE = 3


@dataclass(frozen=True)
class TrustRegion:
    """
    Box of side edge·weights centred on the best target-fidelity input.

    `weights` scale the edge per dimension and have geometric mean 1.
    Low-fidelity observations never move the region: until the first
    target-fidelity value arrives the center stays where
    `init_trust_region` put it, the domain midpoint by default.
    """
    center: np.ndarray
    best_value: float
    edge: float = EDGE_INIT
    weights: Optional[np.ndarray] = None
    success_count: int = 0
    failure_count: int = 0
    success_tolerance: int = SUCCESS_TOLERANCE
    failure_tolerance: int = 4
    edge_min: float = EDGE_MIN
    edge_max: float = EDGE_MAX
    edge_init: float = EDGE_INIT
    restarts: int = field(default=0)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).ravel().copy()
        center.setflags(write=False)
        object.__setattr__(self, 'center', center)
        weights = np.ones_like(center) if self.weights is None else np.asarray(self.weights, dtype=float)
        object.__setattr__(self, 'weights', weights)
        if not self.edge_min <= self.edge_max:
            raise ValueError("edge_min must not exceed edge_max")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    @property
    def lengths(self) -> np.ndarray:
        return self.edge * self.weights

    def bounds(self):
        lo = np.maximum(self.center - self.lengths / 2.0, 0.0)
        hi = np.minimum(self.center + self.lengths / 2.0, 1.0)
        return lo, hi


def init_trust_region(dim: int, batch_size: int, center: Optional[np.ndarray] = None,
                      best_value: float = -np.inf) -> TrustRegion:
    """
    Fresh region; the failure tolerance is ⌈max(4, d/batch)⌉.

    Without a `center` the region sits at the midpoint of the unit box with
    best_value -inf, and stays there until a target-fidelity observation.
    """
    center = np.full(dim, 0.5) if center is None else center
    return TrustRegion(center=center, best_value=best_value,
                       failure_tolerance=int(math.ceil(max(4.0, dim / max(batch_size, 1)))))


def lengthscale_weights(lengthscales: np.ndarray) -> np.ndarray:
    lengthscales = np.asarray(lengthscales, dtype=float)
    return lengthscales / np.exp(np.mean(np.log(lengthscales)))


def candidate_count(dim: int) -> int:
    return min(5000, max(2000, 200 * dim))


def region_candidates(tr: TrustRegion, domain: Domain, seed: int,
                      n_candidates: Optional[int] = None) -> np.ndarray:
    """
    Low-discrepancy points inside the region, or the grid points it contains.

    Raises:
        TrustRegionError: when the region does not meet the domain
    """
    lo, hi = tr.bounds()
    if np.any(hi < lo):
        raise TrustRegionError(f"Trust region around {tr.center} lies outside the domain")
    n = n_candidates or candidate_count(tr.dim)
    if isinstance(domain, GridDomain):
        inside = np.all((domain.points >= lo) & (domain.points <= hi), axis=1)
        points = domain.points[inside]
        if points.shape[0] == 0:
            raise TrustRegionError("Trust region contains no grid points")
        if points.shape[0] > n:
            idx = np.random.default_rng(seed).choice(points.shape[0], size=n, replace=False)
            points = points[np.sort(idx)]
        return points
    sobol = qmc.Sobol(d=tr.dim, scramble=True, seed=seed)
    unit = sobol.random_base2(int(math.ceil(math.log2(n))))[:n]
    return lo + (hi - lo) * unit


def turbo_propose(tr: TrustRegion, surrogate: MultiFidelitySurrogate, domain: Domain, seed: int,
                  n_candidates: Optional[int] = None,
                  cap: int = Settings.MFABO_GRID_CAP) -> np.ndarray:
    """Thompson-sampled argmax of the target fidelity over the region's candidates."""
    candidates = region_candidates(tr, domain, seed, n_candidates)
    return thompson_select(surrogate, candidates, seed, surrogate.n_fidelities, cap)


def turbo_update(tr: TrustRegion, x: np.ndarray, y: float, fidelity: int,
                 target_fidelity: int) -> TrustRegion:
    """
    Account for one observation. Only target-fidelity observations count.

    Successes require an improvement of more than 1e-3·|best|; the edge
    doubles after `success_tolerance` successes and halves after
    `failure_tolerance` failures, restarting at the incumbent with the
    initial edge once it falls below edge_min.
    """
    if fidelity != target_fidelity:
        return tr
    x = np.asarray(x, dtype=float).ravel()
    if np.isfinite(tr.best_value):
        improved = y > tr.best_value + 1e-3 * abs(tr.best_value)
    else:
        improved = True
    success = tr.success_count + 1 if improved else 0
    failure = 0 if improved else tr.failure_count + 1
    if y > tr.best_value:
        center, best = x, float(y)
    else:
        center, best = tr.center, tr.best_value
    edge, restarts = tr.edge, tr.restarts

    if success >= tr.success_tolerance:
        edge = min(2.0 * edge, tr.edge_max)
        success, failure = 0, 0
    elif failure >= tr.failure_tolerance:
        edge = edge / 2.0
        success, failure = 0, 0
        if edge < tr.edge_min:
            logger.info(f"Trust region collapsed; restarting at the incumbent {best:.4g}")
            edge, restarts = tr.edge_init, restarts + 1
    return replace(tr, center=center, best_value=best, edge=edge, success_count=success,
                   failure_count=failure, restarts=restarts)
