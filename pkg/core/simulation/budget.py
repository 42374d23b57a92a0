"""Batch-space accounting against the budget Λ."""

from dataclasses import dataclass
from typing import Optional, Sequence
import logging

from core.fidelity.specs import FidelitySpec

logger = logging.getLogger(__name__)

_TOLERANCE = 1e-9


@dataclass
class BudgetState:
    """Occupied batch space; never above `capacity` after an admission."""
    capacity: float
    occupied: float = 0.0

    def __post_init__(self):
        if not self.capacity > 0:
            raise ValueError(f"Budget capacity must be positive, got {self.capacity}")

    def fits(self, space: float) -> bool:
        return self.occupied + space <= self.capacity + _TOLERANCE

    def charge(self, space: float):
        if not self.fits(space):
            raise ValueError(f"Charging {space} would exceed capacity {self.capacity} "
                             f"(occupied {self.occupied})")
        self.occupied += space

    def release(self, space: float):
        self.occupied -= space
        if self.occupied < -_TOLERANCE:
            raise ValueError(f"Released more space than was occupied ({self.occupied})")
        self.occupied = max(self.occupied, 0.0)

    @property
    def remaining(self) -> float:
        return self.capacity - self.occupied


def admit_query(budget: BudgetState, m: int, specs: Sequence[FidelitySpec]) -> Optional[int]:
    """
    Fidelity to submit at, or None when nothing fits.

    The selected fidelity is used if its space fits; otherwise the higher
    fidelities that fit are tried, smallest space first.
    """
    if budget.fits(specs[m - 1].space):
        return m
    higher = [k for k in range(m + 1, len(specs) + 1) if budget.fits(specs[k - 1].space)]
    if not higher:
        return None
    choice = min(higher, key=lambda k: (specs[k - 1].space, k))
    logger.debug(f"Fidelity {m} does not fit; falling back to {choice}")
    return choice
