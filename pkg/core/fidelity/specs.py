"""Per-fidelity cost, batch space, delay and noise."""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np


class DelayKind(str, Enum):
    FIXED = 'fixed'
    POISSON = 'poisson'
    GEOMETRIC = 'geometric'


@dataclass(frozen=True)
class DelayModel:
    """Evaluation delay in integer time steps."""
    mean: float
    kind: DelayKind = DelayKind.FIXED

    def __post_init__(self):
        object.__setattr__(self, 'kind', DelayKind(self.kind))
        if self.mean < 0:
            raise ValueError(f"Delay mean must be nonnegative, got {self.mean}")
        if self.kind == DelayKind.GEOMETRIC and self.mean < 1:
            raise ValueError("Geometric delays need a mean of at least 1")

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind == DelayKind.FIXED:
            return int(round(self.mean))
        if self.kind == DelayKind.POISSON:
            return int(rng.poisson(self.mean))
        return int(rng.geometric(1.0 / self.mean))

    def expected(self) -> float:
        return float(self.mean)


@dataclass(frozen=True)
class FidelitySpec:
    cost: float
    space: float
    delay: DelayModel
    noise: float = 0.0
    bias: float = 0.0

    def __post_init__(self):
        if not self.cost > 0:
            raise ValueError(f"Cost must be positive, got {self.cost}")
        if not self.space > 0:
            raise ValueError(f"Batch space must be positive, got {self.space}")
        if self.noise < 0 or self.bias < 0:
            raise ValueError("Noise and bias bounds must be nonnegative")

    def expected_delay(self) -> float:
        """Expected delay, floored at one step since arrivals land on the next boundary."""
        return max(self.delay.expected(), 1.0)


def validate_fidelities(specs: Sequence[FidelitySpec]):
    """The target fidelity must be the most expensive one."""
    if not specs:
        raise ValueError("At least one fidelity is required")
    top = specs[-1].cost
    if any(s.cost > top for s in specs):
        raise ValueError("The target fidelity must have the highest cost")
