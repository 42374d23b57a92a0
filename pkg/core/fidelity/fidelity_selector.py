"""Choosing the fidelity for an already-chosen input."""

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence
import logging

import numpy as np

from config.settings import Settings
from core.acquisition.mes import MaxValueSampleSet, mes
from core.batching.fantasies import FantasyEnsemble
from core.multifidelity.surrogate import MultiFidelitySurrogate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ThresholdState:
    """
    Thresholds γ^(1)..γ^(M-1) and, per fidelity m, the number of ticks
    since the last query above m.
    """
    gamma: np.ndarray
    idle: np.ndarray

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float).ravel().copy()
        idle = np.asarray(self.idle, dtype=int).ravel().copy()
        if np.any(gamma <= 0):
            raise ValueError(f"Thresholds must be positive, got {gamma}")
        if gamma.shape != idle.shape:
            raise ValueError("gamma and idle counters must have the same length")
        gamma.setflags(write=False)
        idle.setflags(write=False)
        object.__setattr__(self, 'gamma', gamma)
        object.__setattr__(self, 'idle', idle)

    @classmethod
    def initial(cls, n_fidelities: int, gamma: float = Settings.DEFAULT_GAMMA) -> 'ThresholdState':
        return cls(gamma=np.full(n_fidelities - 1, gamma), idle=np.zeros(n_fidelities - 1, dtype=int))


def variance_rule(x: np.ndarray, surrogate: MultiFidelitySurrogate, beta: float,
                  thresholds: ThresholdState) -> int:
    """Lowest fidelity m < M with √β·σ^(m)(x) > γ^(m), otherwise M."""
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    x = np.asarray(x, dtype=float).reshape(1, -1)
    root_beta = np.sqrt(beta)
    for m in range(1, surrogate.n_fidelities):
        _, var = surrogate.predict_batch(x, m)
        if root_beta * np.sqrt(var[0]) > thresholds.gamma[m - 1]:
            return m
    return surrogate.n_fidelities


def information_scores(x: np.ndarray, ensemble: FantasyEnsemble, fstar: MaxValueSampleSet,
                       expected_delays: Sequence[float]) -> np.ndarray:
    """Fantasy-averaged information gain per expected delay, one entry per fidelity."""
    if any(d <= 0 for d in expected_delays):
        raise ValueError(f"Expected delays must be positive, got {list(expected_delays)}")
    x = np.asarray(x, dtype=float).reshape(1, -1)

    def gain(surrogate, X, m):
        return mes(X, m, surrogate, fstar)

    return np.array([ensemble.average(gain, x, m)[0] / expected_delays[m - 1]
                     for m in range(1, len(expected_delays) + 1)])


def information_rule(x: np.ndarray, surrogate: MultiFidelitySurrogate, pending_X: np.ndarray,
                     pending_m: Sequence[int], fstar: MaxValueSampleSet,
                     expected_delays: Sequence[float], n_fantasies: int, seed: int,
                     ensemble: Optional[FantasyEnsemble] = None) -> int:
    """
    argmax_m E_{f_Q}[I((x, f^(m)(x)); f*)] / E[τ^(m)], ties to the highest fidelity.

    One fantasy ensemble and one f* sample set are shared across fidelities.
    """
    M = surrogate.n_fidelities
    if len(expected_delays) != M:
        raise ValueError(f"{len(expected_delays)} delays for {M} fidelities")
    if M == 1:
        return 1
    if ensemble is None:
        ensemble = FantasyEnsemble.build(surrogate, pending_X, pending_m, n_fantasies, seed)
    scores = information_scores(x, ensemble, fstar, expected_delays)
    best = np.flatnonzero(scores == scores.max())
    return int(best[-1]) + 1


def update_thresholds(state: ThresholdState, expected_delays: Sequence[float],
                      activity: Iterable[Iterable[int]]) -> ThresholdState:
    """
    Advance the doubling heuristic by one tick per entry of `activity`.

    Each tick lists the fidelities queried in it. When no query above
    fidelity m happened for more than E[τ^(m+1)]/E[τ^(m)] ticks, γ^(m)
    doubles and its counter restarts.
    """
    gamma = state.gamma.copy()
    idle = state.idle.copy()
    ratios = np.array([expected_delays[m + 1] / expected_delays[m] for m in range(len(gamma))])
    for tick in activity:
        top = max(tick, default=0)
        for i in range(len(gamma)):
            fidelity = i + 1
            if top > fidelity:
                idle[i] = 0
                continue
            idle[i] += 1
            if idle[i] > ratios[i]:
                gamma[i] *= 2.0
                idle[i] = 0
                logger.info(f"No query above fidelity {fidelity} for {ratios[i]:g} ticks; "
                            f"threshold raised to {gamma[i]:.3g}")
    return replace(state, gamma=gamma, idle=idle)
