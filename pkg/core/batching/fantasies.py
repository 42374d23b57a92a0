"""Marginalizing an acquisition over fantasized outcomes of pending queries."""

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np

from core.multifidelity.surrogate import MultiFidelitySurrogate, fantasize

Acquisition = Callable[[MultiFidelitySurrogate, np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class FantasyEnsemble:
    """Surrogates conditioned on joint posterior samples at the pending queries."""
    surrogates: List[MultiFidelitySurrogate]

    @classmethod
    def build(cls, surrogate: MultiFidelitySurrogate, pending_X: np.ndarray,
              pending_m: Sequence[int], n_fantasies: int, seed: int) -> 'FantasyEnsemble':
        return cls(fantasize(surrogate, pending_X, pending_m, n_fantasies, seed))

    def __len__(self) -> int:
        return len(self.surrogates)

    def average(self, acquisition: Acquisition, X: np.ndarray, m: int) -> np.ndarray:
        total = None
        for surrogate in self.surrogates:
            scores = np.asarray(acquisition(surrogate, X, m), dtype=float)
            total = scores if total is None else total + scores
        return total / len(self.surrogates)


def fantasized_acquisition(X: np.ndarray, m: int, surrogate: MultiFidelitySurrogate,
                           pending_X: np.ndarray, pending_m: Sequence[int], n_fantasies: int,
                           seed: int, acquisition: Acquisition) -> np.ndarray:
    """
    (1/S)·Σ_s α(x, m | D ∪ {(Q, f̃_Q^(s))}).

    With no pending queries this is α(x, m | D) exactly.
    """
    ensemble = FantasyEnsemble.build(surrogate, pending_X, pending_m, n_fantasies, seed)
    return ensemble.average(acquisition, X, m)
