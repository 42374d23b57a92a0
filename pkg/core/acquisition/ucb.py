"""Upper confidence bounds, single- and multi-fidelity."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from config.settings import Settings
from core.multifidelity.surrogate import MultiFidelitySurrogate


class BetaSchedule(str, Enum):
    FIXED = 'fixed'
    LOGARITHMIC = 'logarithmic'


@dataclass(frozen=True)
class UCBConfig:
    """Exploration weight β_t, either constant or growing like log t."""
    beta: float = Settings.DEFAULT_BETA
    schedule: BetaSchedule = BetaSchedule.FIXED

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, 'schedule', BetaSchedule(self.schedule))

    def beta_t(self, t: int, dim: int) -> float:
        """β at iteration t (1-based); the logarithmic schedule is 0.2·d·log(2t)."""
        if self.schedule == BetaSchedule.FIXED:
            return self.beta
        return 0.2 * dim * np.log(2.0 * max(int(t), 1))


@dataclass(frozen=True)
class BiasBounds:
    """Maximum absolute bias ζ^(m) of each fidelity against the target."""
    zeta: np.ndarray

    def __post_init__(self):
        zeta = np.atleast_1d(np.asarray(self.zeta, dtype=float)).copy()
        zeta.setflags(write=False)
        object.__setattr__(self, 'zeta', zeta)
        if np.any(zeta < 0):
            raise ValueError(f"Bias bounds must be nonnegative, got {zeta}")
        if np.any(np.diff(zeta) > 0):
            raise ValueError(f"Bias bounds must be non-increasing in fidelity, got {zeta}")
        if zeta[-1] != 0:
            raise ValueError("The target fidelity must have zero bias")

    @property
    def n_fidelities(self) -> int:
        return self.zeta.shape[0]


def ucb_from_moments(mean: np.ndarray, var: np.ndarray, beta: float) -> np.ndarray:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return np.asarray(mean) + np.sqrt(beta) * np.sqrt(np.maximum(var, 0.0))


def ucb(X: np.ndarray, surrogate: MultiFidelitySurrogate, beta: float) -> np.ndarray:
    """μ + √β·σ of the target fidelity at each row of X."""
    mean, var = surrogate.predict_batch(X, surrogate.n_fidelities)
    return ucb_from_moments(mean, var, beta)


def fidelity_bounds(X: np.ndarray, surrogate: MultiFidelitySurrogate, bias: BiasBounds,
                    beta: float) -> np.ndarray:
    """Per-fidelity bounds μ^(m) + √β·σ^(m) + ζ^(m), shape (M, n)."""
    if bias.n_fidelities != surrogate.n_fidelities:
        raise ValueError(f"{bias.n_fidelities} bias bounds for {surrogate.n_fidelities} fidelities")
    rows = []
    for m in range(1, surrogate.n_fidelities + 1):
        mean, var = surrogate.predict_batch(X, m)
        rows.append(ucb_from_moments(mean, var, beta) + bias.zeta[m - 1])
    return np.vstack(rows)


def mf_ucb(X: np.ndarray, surrogate: MultiFidelitySurrogate, bias: BiasBounds,
           beta: float) -> np.ndarray:
    """Tightest of the per-fidelity upper bounds on the target objective."""
    return fidelity_bounds(X, surrogate, bias, beta).min(axis=0)
