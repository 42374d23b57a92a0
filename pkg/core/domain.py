"""Search domains: the unit box or a finite candidate set."""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class BoxDomain:
    """The unit hypercube [0, 1]^dim."""
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"Domain dimension must be positive, got {self.dim}")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random((n, self.dim))

    def sobol(self, n: int, seed: int) -> np.ndarray:
        sampler = qmc.Sobol(d=self.dim, scramble=True, seed=seed)
        return sampler.random(n)

    def clip(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X, 0.0, 1.0)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((x >= 0.0) & (x <= 1.0)))


@dataclass(frozen=True)
class GridDomain:
    """A finite candidate set; every query must be one of its rows."""
    points: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float)).copy()
        if points.shape[0] == 0:
            raise ValueError("Grid domain needs at least one point")
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.points[rng.integers(0, self.size, size=n)]

    def clip(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float)

    def contains(self, x: np.ndarray) -> bool:
        x = np.asarray(x, dtype=float).ravel()
        return bool(np.any(np.all(np.isclose(self.points, x[None, :]), axis=1)))


Domain = Union[BoxDomain, GridDomain]
