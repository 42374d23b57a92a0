"""Typed view of the strategy table."""

from dataclasses import dataclass
from enum import Enum
from typing import Dict

from config.strategies import STRATEGIES
from core.exceptions import ConfigError
from core.multifidelity.surrogate import ModelVariant


class AcquisitionKind(str, Enum):
    UCB = 'ucb'
    MF_UCB = 'mf_ucb'
    MES = 'mes'
    THOMPSON = 'thompson'


class BatchingKind(str, Enum):
    RANDOM_FILL = 'random_fill'
    PENALIZATION = 'penalization'
    FANTASIES = 'fantasies'
    TRUST_REGION = 'trust_region'


class FidelityRule(str, Enum):
    TARGET = 'target'
    VARIANCE = 'variance'
    INFORMATION = 'information'


@dataclass(frozen=True)
class StrategySpec:
    name: str
    acquisition: AcquisitionKind
    batching: BatchingKind
    fidelity_rule: FidelityRule
    model: ModelVariant

    def __post_init__(self):
        if self.acquisition == AcquisitionKind.MF_UCB and self.model != ModelVariant.INDEPENDENT:
            raise ConfigError(f"{self.name}: MF-GP-UCB bounds need independent GPs")
        if self.model == ModelVariant.SINGLE and self.fidelity_rule != FidelityRule.TARGET:
            raise ConfigError(f"{self.name}: a single-fidelity model can only query the target")
        if (self.acquisition == AcquisitionKind.THOMPSON) != (self.batching == BatchingKind.TRUST_REGION):
            raise ConfigError(f"{self.name}: Thompson sampling is only used inside the trust region")

    @property
    def multi_fidelity(self) -> bool:
        return self.model != ModelVariant.SINGLE

    @property
    def needs_max_values(self) -> bool:
        return self.acquisition == AcquisitionKind.MES or self.fidelity_rule == FidelityRule.INFORMATION


def _build(name: str, row: Dict) -> StrategySpec:
    return StrategySpec(
        name=name,
        acquisition=AcquisitionKind(row["acquisition"]),
        batching=BatchingKind(row["batching"]),
        fidelity_rule=FidelityRule(row["fidelity_rule"]),
        model=ModelVariant(row["model"]),
    )


STRATEGY_NAMES = tuple(STRATEGIES)


def get_strategy(name: str) -> StrategySpec:
    """
    Raises:
        ConfigError: for an unknown name; the message lists the valid ones
    """
    if name not in STRATEGIES:
        raise ConfigError(f"Unknown strategy '{name}'. Valid: {', '.join(STRATEGY_NAMES)}")
    return _build(name, STRATEGIES[name])
