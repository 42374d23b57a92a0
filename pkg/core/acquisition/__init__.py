"""Acquisition functions and their maximization."""
from core.acquisition.ucb import BetaSchedule, BiasBounds, UCBConfig, fidelity_bounds, mf_ucb, ucb
from core.acquisition.mes import MaxValueSampleSet, mes, mes_gain, mf_mes_score, sample_max_values
from core.acquisition.optimizer import OptimizerConfig, optimize_acquisition

__all__ = [
    'BetaSchedule', 'BiasBounds', 'UCBConfig', 'fidelity_bounds', 'mf_ucb', 'ucb',
    'MaxValueSampleSet', 'mes', 'mes_gain', 'mf_mes_score', 'sample_max_values',
    'OptimizerConfig', 'optimize_acquisition',
]
