"""Deterministic seed derivation for independent random streams."""

from enum import IntEnum
from typing import Union

import numpy as np


class Stream(IntEnum):
    """Named purposes for derived random streams."""
    INITIAL_DESIGN = 1
    NOISE = 2
    ACQUISITION = 3
    MAX_VALUES = 4
    FANTASIES = 5
    THOMPSON = 6
    FIDELITY = 7
    TRAINING = 8
    DELAYS = 9
    BENCHMARK = 10
    PENALIZER = 11


def derive_seed(seed: int, *keys: Union[int, Stream]) -> int:
    """
    Map (seed, keys...) to a 32-bit seed.

    Distinct key tuples give statistically independent streams, so the order
    in which components draw randomness never changes another component's
    draws.
    """
    entropy = [int(seed) & 0xFFFFFFFF] + [int(k) & 0xFFFFFFFF for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def rng_for(seed: int, *keys: Union[int, Stream]) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
