"""
Asynchronous multi-fidelity optimization loop over simulated time.

Each integer step t:
  1. observations with arrival time ≤ t join the data and free their space
  2. the surrogate is refit every `refit_every` arrivals, otherwise re-conditioned
  3. queries are proposed and admitted until nothing more fits in Λ
  4. the step is logged
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple
import logging
import math

import numpy as np

from config.settings import Settings
from core.acquisition.mes import MaxValueSampleSet, mes, sample_max_values
from core.acquisition.optimizer import OptimizerConfig, optimize_acquisition
from core.acquisition.ucb import BiasBounds, UCBConfig, mf_ucb, ucb
from core.batching.fantasies import FantasyEnsemble
from core.batching.penalization import (
    LocalPenalizer,
    build_penalizer,
    estimate_penalizer_params,
    penalized_acquisition,
)
from core.batching.trust_region import (
    TrustRegion,
    init_trust_region,
    lengthscale_weights,
    turbo_propose,
    turbo_update,
)
from core.benchmarks.presets import BenchmarkPreset
from core.domain import GridDomain
from core.exceptions import MFBOError, RunError, TrainingError, TrustRegionError
from core.fidelity.fidelity_selector import (
    ThresholdState,
    information_rule,
    update_thresholds,
    variance_rule,
)
from core.fidelity.specs import FidelitySpec
from core.gp.training import TrainConfig
from core.multifidelity.surrogate import (
    FidelityDataset,
    ModelVariant,
    MultiFidelitySurrogate,
    SurrogateConfig,
    condition_on,
    fit_surrogate,
)
from core.simulation.budget import BudgetState, admit_query
from core.simulation.records import Event, EventKind, PendingQuery, RunRecord, StepRecord
from core.simulation.strategies import AcquisitionKind, BatchingKind, FidelityRule, StrategySpec
from utils.seeding import Stream, derive_seed, rng_for

logger = logging.getLogger(__name__)


@dataclass
class EngineConfig:
    """Problem, strategy and numerical settings of one run; None means the preset default."""
    preset: BenchmarkPreset
    strategy: StrategySpec
    horizon: Optional[int] = None
    capacity: Optional[float] = None
    batch_size: Optional[int] = None
    fidelities: Optional[Tuple[FidelitySpec, ...]] = None
    ucb: UCBConfig = field(default_factory=UCBConfig)
    gamma: float = Settings.DEFAULT_GAMMA
    threshold_doubling: bool = True
    refit_every: int = Settings.REFIT_EVERY
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
    train: TrainConfig = field(default_factory=TrainConfig)
    config_hash: str = ''

    def __post_init__(self):
        if self.fidelity_normalizer not in ('delay', 'cost'):
            raise ValueError(f"fidelity_normalizer must be 'delay' or 'cost', got {self.fidelity_normalizer}")
        if self.refit_every < 1:
            raise ValueError("refit_every must be at least 1")

    @property
    def specs(self) -> Tuple[FidelitySpec, ...]:
        return self.fidelities or self.preset.fidelities

    @property
    def resolved_horizon(self) -> int:
        return self.horizon or self.preset.horizon

    @property
    def resolved_capacity(self) -> float:
        return self.capacity or self.preset.capacity

    @property
    def resolved_batch_size(self) -> int:
        return self.batch_size or self.preset.batch_size

    def screen_size(self) -> int:
        if self.n_screen:
            return self.n_screen
        if self.strategy.acquisition == AcquisitionKind.MES:
            return Settings.SCREEN_MES
        if self.strategy.model == ModelVariant.MULTITASK:
            return Settings.SCREEN_MULTITASK
        return Settings.SCREEN_PER_DIM_INDEPENDENT * self.preset.dim

    def initial_steps(self) -> int:
        if self.initial_design_steps is not None:
            return self.initial_design_steps
        return int(math.ceil(5 * self.preset.dim / self.resolved_batch_size))


def simulate_observation(query: PendingQuery, preset: BenchmarkPreset, seed: int,
                         specs: Optional[Tuple[FidelitySpec, ...]] = None) -> float:
    """f^(m)(x) + η^(m)·ε with ε drawn from a stream keyed by the query id."""
    specs = specs or preset.fidelities
    value = float(preset.evaluate(query.x[None, :], query.fidelity)[0])
    if not np.isfinite(value):
        raise RunError(f"Objective returned {value} at fidelity {query.fidelity} for query {query.id}")
    noise = specs[query.fidelity - 1].noise
    if noise == 0:
        return value
    return value + noise * float(rng_for(seed, Stream.NOISE, query.id).standard_normal())


class AsyncOptimizer:
    """State of one seeded run."""

    def __init__(self, config: EngineConfig, seed: int):
        self.config = config
        self.seed = seed
        self.preset = config.preset
        self.strategy = config.strategy
        self.specs = config.specs
        self.M = self.preset.n_fidelities
        self.dim = self.preset.dim
        self.domain = self.preset.domain

        self.data = FidelityDataset(self.M, self.dim)
        self.pending: List[PendingQuery] = []
        self.budget = BudgetState(config.resolved_capacity)
        self.surrogate: Optional[MultiFidelitySurrogate] = None
        self.surrogate_config = SurrogateConfig(train=config.train, seed=derive_seed(seed, Stream.TRAINING))
        self.arrivals_since_refit = 0
        self.thresholds = ThresholdState.initial(self.M, config.gamma)
        self.bias = BiasBounds([spec.bias for spec in self.specs])
        self.trust_region: Optional[TrustRegion] = None
        if self.strategy.batching == BatchingKind.TRUST_REGION:
            self.trust_region = init_trust_region(self.dim, config.resolved_batch_size)
        self.next_id = 0
        self.fstar: Optional[MaxValueSampleSet] = None
        self._fstar_time = 0
        self._penalizers: Dict[int, LocalPenalizer] = {}
        self.record = RunRecord(
            benchmark=self.preset.name, strategy=self.strategy.name, seed=seed, n_fidelities=self.M,
            horizon=config.resolved_horizon, config_hash=config.config_hash,
            divergences=self.preset.divergences,
        )

    # ---- arrivals and model ----

    def _collect_arrivals(self, t: int) -> int:
        arrived = sorted((q for q in self.pending if q.arrival_time <= t),
                         key=lambda q: (q.arrival_time, q.id))
        for q in arrived:
            y = simulate_observation(q, self.preset, self.seed, self.specs)
            self.data.add(q.x, q.fidelity, y, time=t)
            self.budget.release(q.space)
            self.pending.remove(q)
            self.record.events.append(Event(t, EventKind.ARRIVE, q.id, q.fidelity, tuple(q.x), y))
            if self.trust_region is not None:
                self.trust_region = turbo_update(self.trust_region, q.x, y, q.fidelity, self.M)
        return len(arrived)

    def _model_ready(self) -> bool:
        variant = self.strategy.model
        if variant == ModelVariant.SINGLE:
            return self.data.count(self.M) > 0
        if variant == ModelVariant.INDEPENDENT:
            return self.data.count(1) > 0
        return len(self.data) > 0

    def _refresh_model(self, n_arrived: int):
        if n_arrived == 0 and self.surrogate is not None:
            return
        self.arrivals_since_refit += n_arrived
        if not self._model_ready():
            return
        self._penalizers.clear()
        if self.surrogate is None or self.arrivals_since_refit >= self.config.refit_every:
            try:
                self.surrogate = fit_surrogate(self.data, self.strategy.model, self.surrogate_config,
                                               previous=self.surrogate)
                self.arrivals_since_refit = 0
                logger.debug(f"Refit {self.strategy.model.value} surrogate on {len(self.data)} points")
                self._reweight_trust_region()
                return
            except TrainingError as e:
                logger.warning(f"Hyperparameter refit failed, keeping previous values: {e}")
                if self.surrogate is None:
                    return
        self.surrogate = condition_on(self.surrogate, self.data)

    def _reweight_trust_region(self):
        if self.trust_region is None or self.surrogate is None:
            return
        if self.surrogate.variant == ModelVariant.MULTITASK:
            stacked = np.array([k.lengthscales for k in self.surrogate.multitask.params.kernels])
            lengthscales = np.exp(np.mean(np.log(stacked), axis=0))
        else:
            lengthscales = self.surrogate.gps[-1].hyperparams.kernel.lengthscales
        self.trust_region = replace(self.trust_region, weights=lengthscale_weights(lengthscales))

    # ---- proposal ----

    def _beta(self) -> float:
        return self.config.ucb.beta_t(len(self.data) + 1, self.dim)

    def _pending_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.pending:
            return np.zeros((0, self.dim)), np.zeros(0, dtype=int)
        return np.stack([q.x for q in self.pending]), np.array([q.fidelity for q in self.pending])

    def _penalty_fidelity(self) -> int:
        if self.data.count(self.M) > 0:
            return self.M
        return self.data.highest_observed_fidelity() or self.M

    def _penalizer(self, query: PendingQuery, t: int, slot: int) -> LocalPenalizer:
        if query.id not in self._penalizers:
            m = self._penalty_fidelity()
            params = estimate_penalizer_params(
                self.surrogate, self.data, query.x, self.config.local_lipschitz, self.domain,
                rng_for(self.seed, Stream.PENALIZER, t, slot, query.id), m=m,
                max_estimator=self.config.max_estimator)
            self._penalizers[query.id] = build_penalizer(query.x, self.surrogate, params, m)
        return self._penalizers[query.id]

    def _max_value_grid(self, t: int) -> np.ndarray:
        rng = rng_for(self.seed, Stream.MAX_VALUES, t)
        size = self.config.max_value_grid
        if isinstance(self.domain, GridDomain):
            if self.domain.size <= size:
                return self.domain.points
            return self.domain.points[np.sort(rng.choice(self.domain.size, size, replace=False))]
        return self.domain.sobol(size, derive_seed(self.seed, Stream.MAX_VALUES, t))

    def _max_values(self, t: int) -> MaxValueSampleSet:
        """f* samples for step t, drawn once per step from the current surrogate."""
        if self._fstar_time != t:
            self._fstar_time = t
            self.fstar = sample_max_values(self.surrogate, self._max_value_grid(t), self.config.n_max_values,
                                           derive_seed(self.seed, Stream.MAX_VALUES, t), self.config.grid_cap)
        return self.fstar

    def _acquire(self, t: int, slot: int, ensemble: Optional[FantasyEnsemble]) -> np.ndarray:
        kind = self.strategy.acquisition
        if kind == AcquisitionKind.THOMPSON:
            return self._turbo(t, slot)

        surrogate, beta = self.surrogate, self._beta()
        if kind == AcquisitionKind.UCB:
            def base(X):
                return ucb(X, surrogate, beta)
        elif kind == AcquisitionKind.MF_UCB:
            def base(X):
                return mf_ucb(X, surrogate, self.bias, beta)
        else:
            fstar = self._max_values(t)

            def base(X):
                return ensemble.average(lambda s, Z, m: mes(Z, m, s, fstar), X, self.M)

        score = base
        if self.strategy.batching == BatchingKind.PENALIZATION:
            penalizers = [self._penalizer(q, t, slot) for q in self.pending]
            positive = kind == AcquisitionKind.MES

            def score(X):
                return penalized_acquisition(base(X), X, penalizers, positive)

        optimizer = OptimizerConfig(self.config.screen_size(), self.config.n_restarts, self.config.refine_epochs)
        return optimize_acquisition(score, self.domain, optimizer, rng_for(self.seed, Stream.ACQUISITION, t, slot))

    def _turbo(self, t: int, slot: int) -> np.ndarray:
        seed = derive_seed(self.seed, Stream.THOMPSON, t, slot)
        try:
            return turbo_propose(self.trust_region, self.surrogate, self.domain, seed,
                                 self.config.turbo_candidates, self.config.grid_cap)
        except TrustRegionError as e:
            logger.warning(f"Resetting trust region: {e}")
            tr = self.trust_region
            self.trust_region = init_trust_region(self.dim, self.config.resolved_batch_size,
                                                   center=np.clip(tr.center, 0.0, 1.0),
                                                   best_value=tr.best_value)
            return turbo_propose(self.trust_region, self.surrogate, self.domain, seed,
                                 self.config.turbo_candidates, self.config.grid_cap)

    def _normalizers(self) -> List[float]:
        if self.config.fidelity_normalizer == 'cost':
            return [spec.cost for spec in self.specs]
        return [spec.expected_delay() for spec in self.specs]

    def _select_fidelity(self, x: np.ndarray, t: int, slot: int,
                         ensemble: Optional[FantasyEnsemble]) -> int:
        rule = self.strategy.fidelity_rule
        if rule == FidelityRule.TARGET:
            return self.M
        if rule == FidelityRule.VARIANCE:
            return variance_rule(x, self.surrogate, self._beta(), self.thresholds)
        pending_X, pending_m = self._pending_arrays()
        return information_rule(x, self.surrogate, pending_X, pending_m, self._max_values(t), self._normalizers(),
                                self.config.n_fantasies, derive_seed(self.seed, Stream.FIDELITY, t, slot),
                                ensemble=ensemble)

    def _in_initial_design(self, t: int) -> bool:
        return t <= self.config.initial_steps() or self.surrogate is None

    def propose(self, t: int, slot: int) -> Tuple[np.ndarray, int]:
        """Next (input, fidelity) for batch slot `slot` of step t."""
        if self._in_initial_design(t):
            x = self.domain.sample(1, rng_for(self.seed, Stream.INITIAL_DESIGN, t, slot))[0]
            return x, (1 if self.strategy.multi_fidelity else self.M)

        ensemble = None
        uses_fantasies = (self.strategy.batching == BatchingKind.FANTASIES
                          or self.strategy.fidelity_rule == FidelityRule.INFORMATION)
        if uses_fantasies:
            pending_X, pending_m = self._pending_arrays()
            ensemble = FantasyEnsemble.build(self.surrogate, pending_X, pending_m, self.config.n_fantasies,
                                             derive_seed(self.seed, Stream.FANTASIES, t, slot))

        if self.strategy.batching == BatchingKind.RANDOM_FILL and slot > 0:
            x = self.domain.sample(1, rng_for(self.seed, Stream.ACQUISITION, t, slot))[0]
        else:
            x = self._acquire(t, slot, ensemble)
        return x, self._select_fidelity(x, t, slot, ensemble)

    # ---- step loop ----

    def _submit(self, x: np.ndarray, m: int, t: int) -> PendingQuery:
        spec = self.specs[m - 1]
        delay = spec.delay.sample(rng_for(self.seed, Stream.DELAYS, self.next_id))
        query = PendingQuery(id=self.next_id, x=np.asarray(x, dtype=float).copy(), fidelity=m,
                             submit_time=t, arrival_time=t + max(delay, 1), space=spec.space)
        self.next_id += 1
        self.budget.charge(spec.space)
        self.pending.append(query)
        self.record.events.append(Event(t, EventKind.SUBMIT, query.id, m, tuple(query.x)))
        return query

    def _fill(self, t: int) -> List[int]:
        submitted: List[int] = []
        smallest = min(spec.space for spec in self.specs)
        slot = 0
        while self.budget.fits(smallest):
            x, m = self.propose(t, slot)
            admitted = admit_query(self.budget, m, self.specs)
            if admitted is None:
                break
            self._submit(x, admitted, t)
            submitted.append(admitted)
            slot += 1
        return submitted

    def _check_budget(self, t: int):
        occupied = sum(q.space for q in self.pending)
        if abs(occupied - self.budget.occupied) > 1e-9 or self.budget.occupied > self.budget.capacity + 1e-9:
            raise RunError(f"Batch-space accounting broken at t={t}: tracked {self.budget.occupied}, "
                           f"pending {occupied}, capacity {self.budget.capacity}", record=self.record)

    def _log_step(self, t: int, submitted: List[int]):
        best = self.data.best(self.M)
        optimum = self.preset.optimum
        regret = max(optimum - best, 0.0) if optimum is not None and best is not None else None
        pending_counts = tuple(sum(1 for q in self.pending if q.fidelity == m) for m in range(1, self.M + 1))
        submitted_counts = tuple(submitted.count(m) for m in range(1, self.M + 1))
        self.record.steps.append(StepRecord(
            time=t, best_hf=best if best is not None else float('nan'), regret=regret,
            occupied_space=self.budget.occupied, pending=pending_counts, submitted=submitted_counts,
        ))

    def step(self, t: int):
        n_arrived = self._collect_arrivals(t)
        self._refresh_model(n_arrived)
        submitted = self._fill(t)
        if (self.strategy.fidelity_rule == FidelityRule.VARIANCE and self.config.threshold_doubling
                and not self._in_initial_design(t)):
            self.thresholds = update_thresholds(self.thresholds, [s.expected_delay() for s in self.specs],
                                                [submitted])
        self._check_budget(t)
        self._log_step(t, submitted)
        logger.debug(f"t={t}: {n_arrived} arrived, submitted {submitted}, "
                     f"occupied {self.budget.occupied}/{self.budget.capacity}")

    def run(self) -> RunRecord:
        horizon = self.config.resolved_horizon
        logger.info(f"Running {self.strategy.name} on {self.preset.name} (seed {self.seed}, T={horizon})")
        for t in range(1, horizon + 1):
            self.step(t)
        self.record.completed = True
        regret = self.record.final_regret()
        logger.info(f"Finished {self.strategy.name} seed {self.seed}: regret "
                    f"{'n/a' if regret is None else f'{regret:.4g}'}, {len(self.record.submissions())} queries")
        return self.record


def run(config: EngineConfig, seed: int) -> RunRecord:
    """
    Execute one seeded run.

    Raises:
        RunError: when a model, strategy or objective error aborts the run;
            the partial RunRecord is attached
    """
    optimizer = AsyncOptimizer(config, seed)
    try:
        return optimizer.run()
    except RunError as e:
        if e.record is None:
            e.record = optimizer.record
        raise
    except (MFBOError, ValueError, np.linalg.LinAlgError) as e:
        raise RunError(f"{config.strategy.name} on {config.preset.name} (seed {seed}) aborted: {e}",
                       record=optimizer.record) from e
