"""
Synthetic battery-formulation benchmark.

Six mixture coordinates of which exactly three are active and sum to one.
The objective pair is two independent GP sample paths drawn with random
Fourier features on those coordinates.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Tuple
import warnings

import numpy as np
from scipy.stats import qmc

from config.benchmark_defaults import BATTERY_GP
from utils.seeding import Stream, derive_seed

N_COMPONENTS = 6
N_ACTIVE = 3
ACTIVITY_PATTERNS = tuple(combinations(range(N_COMPONENTS), N_ACTIVE))


@dataclass(frozen=True)
class ConstrainedGrid:
    points: np.ndarray
    n_base_points: int

    def __len__(self) -> int:
        return self.points.shape[0]


def close_simplex(base: np.ndarray) -> np.ndarray:
    """Append 1 - x_a - x_b to each 2-D point."""
    base = np.atleast_2d(np.asarray(base, dtype=float))
    return np.column_stack([base, 1.0 - base.sum(axis=1)])


def expand_patterns(triples: np.ndarray) -> np.ndarray:
    """Place every 3-component mixture on each of the 20 activity patterns."""
    blocks = []
    for pattern in ACTIVITY_PATTERNS:
        block = np.zeros((triples.shape[0], N_COMPONENTS))
        block[:, pattern] = triples
        blocks.append(block)
    return np.vstack(blocks)


def build_constrained_grid(resolution: int, seed: int = 0) -> ConstrainedGrid:
    """
    Feasible mixtures from `resolution` scrambled Sobol points in 2-D.

    Points with x_a + x_b ≥ 1 are dropped so every mixture keeps three
    strictly positive components.
    """
    if resolution < 2:
        raise ValueError(f"Grid resolution must be at least 2, got {resolution}")
    with warnings.catch_warnings():
        # non power-of-two sizes warn about Sobol balance
        warnings.simplefilter("ignore", UserWarning)
        base = qmc.Sobol(d=2, scramble=True, seed=seed).random(resolution)
    keep = (base.sum(axis=1) < 1.0) & np.all(base > 0.0, axis=1)
    triples = close_simplex(base[keep])
    return ConstrainedGrid(points=expand_patterns(triples), n_base_points=int(keep.sum()))


def random_feature_sample(seed: int, dim: int = N_COMPONENTS,
                          lengthscale: float = BATTERY_GP["lengthscale"],
                          output_scale: float = BATTERY_GP["output_scale"],
                          n_features: int = BATTERY_GP["n_features"]) -> Callable[[np.ndarray], np.ndarray]:
    """An approximate RBF-GP sample path f(x) = √(2θ0/D)·Σ w_i cos(ω_iᵀx + b_i)."""
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n_features, dim)) / lengthscale
    phase = rng.uniform(0.0, 2.0 * np.pi, n_features)
    weights = rng.standard_normal(n_features)
    amplitude = np.sqrt(2.0 * output_scale / n_features)

    def sample(X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return amplitude * np.cos(X @ omega.T + phase[None, :]) @ weights
    return sample


def make_battery_objective(seed: int) -> Tuple[Callable, Callable]:
    """(low fidelity, high fidelity) as independent sample paths; deterministic in `seed`."""
    high = random_feature_sample(derive_seed(seed, Stream.BENCHMARK, 0))
    low = random_feature_sample(derive_seed(seed, Stream.BENCHMARK, 1))
    return low, high
