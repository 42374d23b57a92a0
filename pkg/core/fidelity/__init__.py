"""Fidelity specifications and selection rules."""
from core.fidelity.specs import DelayKind, DelayModel, FidelitySpec, validate_fidelities
from core.fidelity.fidelity_selector import (
    ThresholdState,
    information_rule,
    information_scores,
    update_thresholds,
    variance_rule,
)

__all__ = [
    'DelayKind', 'DelayModel', 'FidelitySpec', 'validate_fidelities',
    'ThresholdState', 'information_rule', 'information_scores', 'update_thresholds',
    'variance_rule',
]
