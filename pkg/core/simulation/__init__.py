"""Discrete-time asynchronous optimization loop."""
from core.simulation.budget import BudgetState, admit_query
from core.simulation.engine import AsyncOptimizer, EngineConfig, run, simulate_observation
from core.simulation.records import Event, EventKind, PendingQuery, RunRecord, StepRecord
from core.simulation.strategies import (
    STRATEGY_NAMES,
    AcquisitionKind,
    BatchingKind,
    FidelityRule,
    StrategySpec,
    get_strategy,
)

__all__ = [
    'BudgetState', 'admit_query',
    'AsyncOptimizer', 'EngineConfig', 'run', 'simulate_observation',
    'Event', 'EventKind', 'PendingQuery', 'RunRecord', 'StepRecord',
    'STRATEGY_NAMES', 'AcquisitionKind', 'BatchingKind', 'FidelityRule', 'StrategySpec', 'get_strategy',
]
