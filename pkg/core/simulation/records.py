"""Pending queries and the run trace."""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class PendingQuery:
    """An experiment in flight; it is observed at `arrival_time`."""
    id: int
    x: np.ndarray
    fidelity: int
    submit_time: int
    arrival_time: int
    space: float

    def __post_init__(self):
        if not self.arrival_time > self.submit_time:
            raise ValueError(f"Query {self.id} arrives at {self.arrival_time}, "
                             f"not after its submission at {self.submit_time}")


class EventKind(str, Enum):
    SUBMIT = 'submit'
    ARRIVE = 'arrive'


@dataclass(frozen=True)
class Event:
    time: int
    kind: EventKind
    query_id: int
    fidelity: int
    x: Tuple[float, ...]
    value: Optional[float] = None


@dataclass(frozen=True)
class StepRecord:
    """State at the end of one time step."""
    time: int
    best_hf: float
    regret: Optional[float]
    occupied_space: float
    pending: Tuple[int, ...]
    submitted: Tuple[int, ...]


@dataclass
class RunRecord:
    benchmark: str
    strategy: str
    seed: int
    n_fidelities: int
    horizon: int
    config_hash: str = ''
    divergences: Tuple[str, ...] = ()
    events: List[Event] = field(default_factory=list)
    steps: List[StepRecord] = field(default_factory=list)
    completed: bool = False

    def submissions(self) -> List[Event]:
        return [e for e in self.events if e.kind == EventKind.SUBMIT]

    def arrivals(self) -> List[Event]:
        return [e for e in self.events if e.kind == EventKind.ARRIVE]

    def query_sequence(self) -> List[Tuple[Tuple[float, ...], int]]:
        return [(e.x, e.fidelity) for e in self.submissions()]

    def final_regret(self) -> Optional[float]:
        return self.steps[-1].regret if self.steps else None

    def best_trace(self) -> np.ndarray:
        return np.array([s.best_hf for s in self.steps])
