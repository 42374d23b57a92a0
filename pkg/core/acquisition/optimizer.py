"""Screen-then-refine maximization of acquisition functions."""

from dataclasses import dataclass
from typing import Callable, Union
import logging

import numpy as np
from scipy.optimize import minimize

from config.settings import Settings
from core.domain import BoxDomain, Domain, GridDomain

logger = logging.getLogger(__name__)

ScoreFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class OptimizerConfig:
    n_screen: int = Settings.SCREEN_MULTITASK
    n_restarts: int = Settings.N_RESTARTS
    epochs: int = Settings.REFINE_EPOCHS

    def __post_init__(self):
        if self.n_screen < 1 or self.n_restarts < 0:
            raise ValueError("Screen size must be positive and restarts nonnegative")


def _finite_scores(score_fn: ScoreFn, X: np.ndarray) -> np.ndarray:
    scores = np.asarray(score_fn(X), dtype=float).ravel()
    return np.where(np.isfinite(scores), scores, -np.inf)


def optimize_acquisition(score_fn: ScoreFn, domain: Union[Domain, np.ndarray],
                         config: OptimizerConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Maximize a vectorized score over a box or a finite grid.

    Box domains are screened with uniform random points; the best
    `n_restarts` are refined with bounded L-BFGS-B and a refined point only
    replaces the incumbent when it scores strictly higher. Grid domains are
    enumerated. Ties go to the lowest index.

    Raises:
        ValueError: on an empty domain
    """
    if isinstance(domain, np.ndarray):
        if domain.size == 0:
            raise ValueError("Cannot optimize over an empty domain")
        domain = GridDomain(domain)

    if isinstance(domain, GridDomain):
        scores = _finite_scores(score_fn, domain.points)
        return domain.points[int(np.argmax(scores))].copy()

    screen = domain.sample(config.n_screen, rng)
    scores = _finite_scores(score_fn, screen)
    order = np.argsort(-scores, kind='stable')
    best_x, best_score = screen[order[0]].copy(), scores[order[0]]

    bounds = [(0.0, 1.0)] * domain.dim

    def negative(x: np.ndarray) -> float:
        value = _finite_scores(score_fn, x[None, :])[0]
        return -value if np.isfinite(value) else 1e300

    for idx in order[:config.n_restarts]:
        result = minimize(negative, screen[idx], method='L-BFGS-B', bounds=bounds,
                          options={'maxiter': config.epochs})
        x = domain.clip(result.x)
        score = _finite_scores(score_fn, x[None, :])[0]
        if score > best_score:
            best_x, best_score = x, score
    logger.debug(f"Acquisition maximum {best_score:.4g} after {config.n_restarts} refinements")
    return best_x
