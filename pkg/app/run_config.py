"""
Run configuration files.

Format: flat `key = value` lines under `[run]` and `[overrides]` headers,
`#` starts a comment. Sections only group keys; every key maps onto one
RunConfig field.

    [run]
    benchmark = Currin2D
    strategy = UCB-V-LP
    seeds = 0..9
    horizon = 250

    [overrides]
    gamma = 0.1
    beta_schedule = logarithmic
"""

from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional
import hashlib
import json
import logging

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from config.paths import Paths
from config.settings import Settings
from core.acquisition.ucb import BetaSchedule, UCBConfig
from core.benchmarks.presets import PRESET_NAMES, make_preset
from core.exceptions import ConfigError
from core.gp.training import TrainConfig
from core.simulation.engine import EngineConfig
from core.simulation.strategies import get_strategy

logger = logging.getLogger(__name__)

SECTIONS = ('run', 'overrides')


def parse_seeds(text: str) -> List[int]:
    """'3' -> [3], '0..4' -> [0, 1, 2, 3, 4], '1,5,7' -> [1, 5, 7]."""
    text = str(text).strip()
    if '..' in text:
        start, _, stop = text.partition('..')
        first, last = int(start), int(stop)
        if last < first:
            raise ValueError(f"Empty seed range '{text}'")
        return list(range(first, last + 1))
    return [int(part) for part in text.split(',') if part.strip()]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    # [run]
    benchmark: str
    strategy: str
    model: Optional[str] = None
    seeds: List[int] = [0]
    horizon: Optional[int] = None
    batch_size: Optional[int] = None
    capacity: Optional[float] = None
    delays: Optional[List[int]] = None
    out: Optional[Path] = None
    benchmark_seed: int = 0

    # [overrides]
    beta: float = Settings.DEFAULT_BETA
    beta_schedule: BetaSchedule = BetaSchedule.FIXED
    gamma: float = Settings.DEFAULT_GAMMA
    threshold_doubling: bool = True
    refit_every: int = Settings.REFIT_EVERY
    train_epochs: int = Settings.TRAIN_EPOCHS
    n_fantasies: int = Settings.N_FANTASIES
    n_max_values: int = Settings.N_MAX_VALUE_SAMPLES
    max_value_grid: int = Settings.MES_GRID_SIZE
    n_screen: Optional[int] = None
    n_restarts: int = Settings.N_RESTARTS
    refine_epochs: int = Settings.REFINE_EPOCHS
    local_lipschitz: bool = True
    max_estimator: str = 'max_y'
    fidelity_normalizer: str = 'delay'
    turbo_candidates: Optional[int] = None
    initial_design_steps: Optional[int] = None
    grid_cap: int = Settings.MFABO_GRID_CAP

    @field_validator('seeds', mode='before')
    @classmethod
    def _seeds(cls, value):
        if isinstance(value, (str, int)):
            return parse_seeds(str(value))
        return value

    @field_validator('delays', mode='before')
    @classmethod
    def _delays(cls, value):
        if isinstance(value, str):
            return [int(part) for part in value.split(',') if part.strip()]
        return value

    @field_validator('benchmark')
    @classmethod
    def _benchmark(cls, value: str) -> str:
        if value not in PRESET_NAMES:
            raise ValueError(f"Unknown benchmark '{value}'. Valid: {', '.join(PRESET_NAMES)}")
        return value

    @field_validator('strategy')
    @classmethod
    def _strategy(cls, value: str) -> str:
        try:
            get_strategy(value)
        except ConfigError as e:
            raise ValueError(str(e)) from e
        return value

    @field_validator('max_estimator')
    @classmethod
    def _max_estimator(cls, value: str) -> str:
        if value not in ('max_y', 'posterior_mean'):
            raise ValueError(f"max_estimator must be 'max_y' or 'posterior_mean', got '{value}'")
        return value

    @field_validator('fidelity_normalizer')
    @classmethod
    def _normalizer(cls, value: str) -> str:
        if value not in ('delay', 'cost'):
            raise ValueError(f"fidelity_normalizer must be 'delay' or 'cost', got '{value}'")
        return value

    @field_validator('horizon', 'batch_size', 'refit_every', 'n_fantasies', 'n_max_values', 'max_value_grid',
                     'n_restarts', 'grid_cap')
    @classmethod
    def _positive(cls, value):
        if value is not None and value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @model_validator(mode='after')
    def _compatible(self):
        spec = get_strategy(self.strategy)
        if self.model is not None and self.model != spec.model.value:
            raise ValueError(f"Strategy {self.strategy} uses the '{spec.model.value}' model, "
                             f"not '{self.model}'")
        if not self.seeds:
            raise ValueError("At least one seed is required")
        if self.capacity is not None and not self.capacity > 0:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if self.delays is not None:
            n_fidelities = len(make_preset(self.benchmark, self.benchmark_seed).fidelities)
            if len(self.delays) != n_fidelities:
                raise ValueError(f"{self.benchmark} has {n_fidelities} fidelities, "
                                 f"got {len(self.delays)} delays")
        return self

    def canonical(self) -> str:
        """Sorted JSON of everything that determines a single run's output."""
        payload = self.model_dump(mode='json', exclude={'seeds', 'out'})
        return json.dumps(payload, sort_keys=True, separators=(',', ':'))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode('utf-8')).hexdigest()

    def engine_config(self) -> EngineConfig:
        preset = make_preset(self.benchmark, self.benchmark_seed)
        fidelities = None
        if self.delays is not None:
            fidelities = tuple(replace(spec, delay=replace(spec.delay, mean=delay))
                               for spec, delay in zip(preset.fidelities, self.delays))
        return EngineConfig(
            preset=preset,
            strategy=get_strategy(self.strategy),
            horizon=self.horizon,
            capacity=self.capacity,
            batch_size=self.batch_size,
            fidelities=fidelities,
            ucb=UCBConfig(beta=self.beta, schedule=self.beta_schedule),
            gamma=self.gamma,
            threshold_doubling=self.threshold_doubling,
            refit_every=self.refit_every,
            n_fantasies=self.n_fantasies,
            n_max_values=self.n_max_values,
            max_value_grid=self.max_value_grid,
            n_screen=self.n_screen,
            n_restarts=self.n_restarts,
            refine_epochs=self.refine_epochs,
            local_lipschitz=self.local_lipschitz,
            max_estimator=self.max_estimator,
            fidelity_normalizer=self.fidelity_normalizer,
            turbo_candidates=self.turbo_candidates,
            initial_design_steps=self.initial_design_steps,
            grid_cap=self.grid_cap,
            train=TrainConfig(epochs=self.train_epochs),
            config_hash=self.config_hash(),
        )


def parse_config_text(text: str) -> Dict[str, str]:
    """
    Flatten a config file into key -> raw string value.

    Raises:
        ConfigError: on a malformed line, an unknown section or a repeated key
    """
    values: Dict[str, str] = {}
    section = 'run'
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('[') and line.endswith(']'):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"Line {number}: unknown section [{section}]")
            continue
        key, sep, value = line.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"Line {number}: expected 'key = value', got '{raw.strip()}'")
        key = key.strip()
        if key in values:
            raise ConfigError(f"Line {number}: '{key}' set twice")
        values[key] = value.strip()
    return values


def apply_overrides(values: Dict[str, str], overrides: Iterable[str]) -> Dict[str, str]:
    merged = dict(values)
    for item in overrides:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError(f"Override must look like key=value, got '{item}'")
        merged[key.strip()] = value.strip()
    return merged


def build_run_config(values: Dict[str, str]) -> RunConfig:
    """
    Raises:
        ConfigError: with pydantic's messages joined when validation fails
    """
    try:
        return RunConfig(**values)
    except ValidationError as e:
        problems = '; '.join(f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
                             for err in e.errors())
        raise ConfigError(f"Invalid run configuration: {problems}") from e


def load_run_config(path: Path, overrides: Iterable[str] = ()) -> RunConfig:
    path = Paths.resolve_config(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    config = build_run_config(apply_overrides(parse_config_text(text), overrides))
    logger.info(f"Loaded {path.name}: {config.strategy} on {config.benchmark}, seeds {config.seeds}")
    return config

