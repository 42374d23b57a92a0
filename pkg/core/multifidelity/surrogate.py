"""
Multi-fidelity surrogate models.

Three variants share one interface:
  * SINGLE      - one exact GP on target-fidelity data only
  * INDEPENDENT - one GP per fidelity; fidelities above 1 inherit the
                  lengthscales and prior mean of fidelity 1
  * MULTITASK   - a joint LMC model over all fidelities
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from config.settings import Settings
from core.exceptions import TrainingError
from core.gp.exact_gp import (
    GPHyperparams,
    PosteriorGP,
    fit_posterior,
    posterior_covariance,
    posterior_gradient_mean_batch,
    predict_batch,
    stable_cholesky,
    with_targets,
)
from core.gp.kernels import KernelParams
from core.gp.training import TrainConfig, fit_hyperparameters, maximize_adam
from core.multifidelity.lmc import (
    LMCParameterCodec,
    MultiTaskPosterior,
    default_lmc_params,
    fit_multitask_posterior,
    lmc_objective,
    multitask_cross_covariance,
    multitask_gradient_mean,
    multitask_joint_covariance,
    multitask_predict,
    multitask_with_targets,
)

logger = logging.getLogger(__name__)


class ModelVariant(str, Enum):
    SINGLE = 'single'
    INDEPENDENT = 'independent'
    MULTITASK = 'multitask'


@dataclass(frozen=True)
class Observation:
    x: np.ndarray
    fidelity: int
    y: float
    time: float = 0.0


class FidelityDataset:
    """Observations grouped by fidelity, plus an arrival-ordered log."""

    def __init__(self, n_fidelities: int, dim: int):
        if n_fidelities < 1 or dim < 1:
            raise ValueError("Dataset needs at least one fidelity and one dimension")
        self.n_fidelities = n_fidelities
        self.dim = dim
        self.log: List[Observation] = []

    def add(self, x, fidelity: int, y: float, time: float = 0.0):
        if not 1 <= fidelity <= self.n_fidelities:
            raise ValueError(f"Fidelity {fidelity} outside 1..{self.n_fidelities}")
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.dim:
            raise ValueError(f"Point dimension {x.shape[0]} does not match {self.dim}")
        self.log.append(Observation(x=x.copy(), fidelity=int(fidelity), y=float(y), time=float(time)))

    def copy(self) -> 'FidelityDataset':
        other = FidelityDataset(self.n_fidelities, self.dim)
        other.log = list(self.log)
        return other

    def __len__(self) -> int:
        return len(self.log)

    def arrays(self, m: int) -> Tuple[np.ndarray, np.ndarray]:
        rows = [o for o in self.log if o.fidelity == m]
        if not rows:
            return np.zeros((0, self.dim)), np.zeros(0)
        return np.stack([o.x for o in rows]), np.array([o.y for o in rows])

    def stacked(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self.log:
            return np.zeros((0, self.dim)), np.zeros(0, dtype=int), np.zeros(0)
        return (np.stack([o.x for o in self.log]),
                np.array([o.fidelity for o in self.log], dtype=int),
                np.array([o.y for o in self.log]))

    def count(self, m: int) -> int:
        return sum(1 for o in self.log if o.fidelity == m)

    def best(self, m: int) -> Optional[float]:
        values = [o.y for o in self.log if o.fidelity == m]
        return max(values) if values else None

    def highest_observed_fidelity(self) -> Optional[int]:
        return max((o.fidelity for o in self.log), default=None)


@dataclass
class SurrogateConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    n_latent: Optional[int] = None
    rank: Optional[int] = None
    init_lengthscale: float = 0.2
    init_noise: float = 1e-2
    seed: int = 0


@dataclass(frozen=True)
class MultiFidelitySurrogate:
    """A fitted surrogate over fidelities 1..n_fidelities."""
    variant: ModelVariant
    n_fidelities: int
    dim: int
    gps: Tuple[PosteriorGP, ...] = ()
    multitask: Optional[MultiTaskPosterior] = None

    def _check(self, m: int):
        if not 1 <= m <= self.n_fidelities:
            raise ValueError(f"Fidelity {m} outside 1..{self.n_fidelities}")

    def _gp(self, m: int) -> PosteriorGP:
        return self.gps[0] if self.variant == ModelVariant.SINGLE else self.gps[m - 1]

    def predict_batch(self, X: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray]:
        self._check(m)
        if self.variant == ModelVariant.MULTITASK:
            return multitask_predict(self.multitask, X, m)
        return predict_batch(self._gp(m), X)

    def covariance(self, X: np.ndarray, m: int) -> Tuple[np.ndarray, np.ndarray]:
        self._check(m)
        if self.variant == ModelVariant.MULTITASK:
            return multitask_joint_covariance(self.multitask, X, np.full(len(np.atleast_2d(X)), m))
        return posterior_covariance(self._gp(m), X)

    def cross_covariance(self, X: np.ndarray, m1: int, m2: int) -> np.ndarray:
        """Posterior Cov(f^(m1)(x), f^(m2)(x)) at each row of X."""
        self._check(m1)
        self._check(m2)
        if self.variant == ModelVariant.MULTITASK:
            return multitask_cross_covariance(self.multitask, X, m1, m2)
        if self.variant == ModelVariant.SINGLE or m1 == m2:
            return self.predict_batch(X, m1)[1]
        return np.zeros(np.atleast_2d(X).shape[0])

    def joint_covariance(self, X: np.ndarray, fidelities: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        """Joint posterior over latent values at arbitrary (x, fidelity) pairs."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        fs = np.asarray(fidelities, dtype=int).ravel()
        if self.variant == ModelVariant.MULTITASK:
            return multitask_joint_covariance(self.multitask, X, fs)
        if self.variant == ModelVariant.SINGLE:
            return posterior_covariance(self.gps[0], X)
        mean = np.zeros(len(fs))
        cov = np.zeros((len(fs), len(fs)))
        for m in np.unique(fs):
            idx = np.flatnonzero(fs == m)
            mean[idx], block = posterior_covariance(self.gps[m - 1], X[idx])
            cov[np.ix_(idx, idx)] = block
        return mean, cov

    def gradient_mean(self, X: np.ndarray, m: int) -> np.ndarray:
        self._check(m)
        if self.variant == ModelVariant.MULTITASK:
            return multitask_gradient_mean(self.multitask, X, m)
        return posterior_gradient_mean_batch(self._gp(m), X)

    def noise_variance(self, m: int) -> float:
        self._check(m)
        if self.variant == ModelVariant.MULTITASK:
            return float(self.multitask.noise[m - 1])
        return self._gp(m).hyperparams.noise_variance


def predict(surrogate: MultiFidelitySurrogate, x: np.ndarray, m: int) -> Tuple[float, float]:
    """Posterior mean and variance of f^(m) at one point."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != surrogate.dim:
        raise ValueError(f"Point dimension {x.shape[0]} does not match {surrogate.dim}")
    mean, var = surrogate.predict_batch(x[None, :], m)
    return float(mean[0]), float(var[0])


def _initial_hyperparams(dim: int, y: np.ndarray, config: SurrogateConfig) -> GPHyperparams:
    box = config.train.boxes['mean_constant']
    mean = box.project(float(np.mean(y))) if len(y) else 0.0
    return GPHyperparams(KernelParams(1.0, np.full(dim, config.init_lengthscale)),
                         noise_variance=config.init_noise, mean_constant=mean)


def _fit_single(data: FidelityDataset, config: SurrogateConfig,
                previous: Optional[MultiFidelitySurrogate]) -> MultiFidelitySurrogate:
    M = data.n_fidelities
    X, y = data.arrays(M)
    if len(y) == 0:
        raise TrainingError("Single-fidelity model has no target-fidelity observations")
    init = (previous.gps[0].hyperparams if previous is not None and previous.gps
            else _initial_hyperparams(data.dim, y, config))
    hp = fit_hyperparameters(X, y, init, config=config.train)
    return MultiFidelitySurrogate(ModelVariant.SINGLE, M, data.dim, gps=(fit_posterior(X, y, hp),))


def _fit_independent(data: FidelityDataset, config: SurrogateConfig,
                     previous: Optional[MultiFidelitySurrogate]) -> MultiFidelitySurrogate:
    X1, y1 = data.arrays(1)
    if len(y1) == 0:
        raise TrainingError("Independent model needs observations at fidelity 1")
    has_previous = previous is not None and len(previous.gps) == data.n_fidelities
    init1 = previous.gps[0].hyperparams if has_previous else _initial_hyperparams(data.dim, y1, config)
    hp1 = fit_hyperparameters(X1, y1, init1, config=config.train)
    gps = [fit_posterior(X1, y1, hp1)]

    inherited = replace(config.train, train_lengthscales=False, train_mean=False)
    for m in range(2, data.n_fidelities + 1):
        Xm, ym = data.arrays(m)
        start = previous.gps[m - 1].hyperparams if has_previous else GPHyperparams(
            KernelParams(hp1.kernel.output_scale, hp1.kernel.lengthscales), config.init_noise)
        start = GPHyperparams(KernelParams(start.kernel.output_scale, hp1.kernel.lengthscales),
                              start.noise_variance, hp1.mean_constant)
        hp = fit_hyperparameters(Xm, ym, start, config=inherited) if len(ym) else start
        gps.append(fit_posterior(Xm, ym, hp))
    return MultiFidelitySurrogate(ModelVariant.INDEPENDENT, data.n_fidelities, data.dim, gps=tuple(gps))


def _fit_multitask(data: FidelityDataset, config: SurrogateConfig,
                   previous: Optional[MultiFidelitySurrogate]) -> MultiFidelitySurrogate:
    M, d = data.n_fidelities, data.dim
    X, fids, y = data.stacked()
    if len(y) == 0:
        raise TrainingError("Multi-task model has no observations")

    if previous is not None and previous.multitask is not None:
        params = previous.multitask.params
        noise = previous.multitask.noise
        mean = previous.multitask.mean_constant
    else:
        # lengthscales, noise and mean start from a single GP on the lowest observed fidelity
        m0 = int(fids.min())
        X0, y0 = data.arrays(m0)
        hp0 = fit_hyperparameters(X0, y0, _initial_hyperparams(d, y0, config), config=config.train)
        params = default_lmc_params(M, d, config.n_latent, config.rank, hp0.kernel.lengthscales,
                                    hp0.kernel.output_scale, seed=config.seed)
        noise = np.full(M, hp0.noise_variance)
        mean = hp0.mean_constant

    codec = LMCParameterCodec(M, d, params.n_latent, params.rank, config.train.boxes)
    objective = lmc_objective(X, fids, y, codec, config.train.penalty_weight)
    theta, value = maximize_adam(objective, codec.pack(params, noise, mean), np.ones(codec.size),
                                 config.train.learning_rate, config.train.epochs, codec.project)
    params, noise, mean = codec.unpack(theta)
    logger.debug(f"LMC training on {len(y)} points finished with objective {value:.4f}")
    post = fit_multitask_posterior(X, fids, y, params, noise, mean)
    return MultiFidelitySurrogate(ModelVariant.MULTITASK, M, d, multitask=post)


_FITTERS = {
    ModelVariant.SINGLE: _fit_single,
    ModelVariant.INDEPENDENT: _fit_independent,
    ModelVariant.MULTITASK: _fit_multitask,
}


def fit_surrogate(data: FidelityDataset, variant: ModelVariant,
                  config: Optional[SurrogateConfig] = None,
                  previous: Optional[MultiFidelitySurrogate] = None) -> MultiFidelitySurrogate:
    """
    Train hyperparameters and condition on all data.

    `previous`, when given, supplies warm-start hyperparameters.

    Raises:
        TrainingError: when the variant has no usable data or training diverges
    """
    return _FITTERS[ModelVariant(variant)](data, config or SurrogateConfig(), previous)


def condition_on(surrogate: MultiFidelitySurrogate, data: FidelityDataset) -> MultiFidelitySurrogate:
    """Re-condition on new data, keeping hyperparameters fixed."""
    if surrogate.variant == ModelVariant.MULTITASK:
        X, fids, y = data.stacked()
        post = surrogate.multitask
        return replace(surrogate, multitask=fit_multitask_posterior(
            X, fids, y, post.params, post.noise, post.mean_constant))
    if surrogate.variant == ModelVariant.SINGLE:
        X, y = data.arrays(data.n_fidelities)
        return replace(surrogate, gps=(fit_posterior(X, y, surrogate.gps[0].hyperparams),))
    gps = []
    for m, gp in enumerate(surrogate.gps, start=1):
        X, y = data.arrays(m)
        gps.append(fit_posterior(X, y, gp.hyperparams))
    return replace(surrogate, gps=tuple(gps))


def _draw(mean: np.ndarray, cov: np.ndarray, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    scale = max(float(np.max(np.abs(np.diag(cov)))), 1e-12) if len(mean) else 1.0
    L, _ = stable_cholesky(0.5 * (cov + cov.T), scale)
    z = rng.standard_normal((len(mean), n_samples))
    return (mean[:, None] + L @ z).T


def sample_paths(surrogate: MultiFidelitySurrogate, grid: np.ndarray, m: int, n_samples: int,
                 seed: int, cap: int = Settings.MFABO_GRID_CAP) -> np.ndarray:
    """
    Joint posterior samples of f^(m) on a finite grid, shape (n_samples, G).

    Raises:
        ValueError: on an empty grid or one larger than `cap`
        NumericalError: when the covariance cannot be factorized
    """
    grid = np.asarray(grid, dtype=float).reshape(-1, surrogate.dim)
    if grid.shape[0] == 0:
        raise ValueError("Cannot sample on an empty grid")
    if grid.shape[0] > cap:
        raise ValueError(f"Grid of {grid.shape[0]} points exceeds the sampling cap {cap}")
    mean, cov = surrogate.covariance(grid, m)
    return _draw(mean, cov, n_samples, np.random.default_rng(seed))


def sample_on_grid(surrogate: MultiFidelitySurrogate, grid: np.ndarray, m: int, seed: int,
                   cap: int = Settings.MFABO_GRID_CAP) -> np.ndarray:
    """One joint posterior sample of f^(m) on a finite grid."""
    return sample_paths(surrogate, grid, m, 1, seed, cap)[0]


def _append_targets(base: MultiFidelitySurrogate,
                    fantasy: np.ndarray, pending_m: np.ndarray, observed: Dict[int, np.ndarray]):
    """Swap fantasy targets into a pre-factorized augmented surrogate."""
    if base.variant == ModelVariant.MULTITASK:
        y = np.concatenate([observed[0], fantasy])
        return replace(base, multitask=multitask_with_targets(base.multitask, y))
    if base.variant == ModelVariant.SINGLE:
        return replace(base, gps=(with_targets(base.gps[0], np.concatenate([observed[0], fantasy])),))
    gps = []
    for m, gp in enumerate(base.gps, start=1):
        gps.append(with_targets(gp, np.concatenate([observed[m], fantasy[pending_m == m]])))
    return replace(base, gps=tuple(gps))


def fantasize(surrogate: MultiFidelitySurrogate, pending_X: np.ndarray, pending_m: Sequence[int],
              n_fantasies: int, seed: int) -> List[MultiFidelitySurrogate]:
    """
    Condition on sampled outcomes of pending queries.

    Fantasy values are drawn jointly from the posterior at the pending
    (x, fidelity) pairs. All fantasies share one factorization of the
    augmented covariance and differ only in their targets.
    """
    pending_X = np.asarray(pending_X, dtype=float).reshape(-1, surrogate.dim)
    pending_m = np.asarray(pending_m, dtype=int).ravel()
    if len(pending_m) == 0:
        return [surrogate]
    if n_fantasies < 1:
        raise ValueError(f"n_fantasies must be positive, got {n_fantasies}")
    mean, cov = surrogate.joint_covariance(pending_X, pending_m)
    samples = _draw(mean, cov, n_fantasies, np.random.default_rng(seed))

    placeholder = mean
    observed: Dict[int, np.ndarray] = {}
    if surrogate.variant == ModelVariant.MULTITASK:
        post = surrogate.multitask
        observed[0] = post.y
        base = replace(surrogate, multitask=fit_multitask_posterior(
            np.vstack([post.X, pending_X]), np.concatenate([post.fidelities, pending_m]),
            np.concatenate([post.y, placeholder]), post.params, post.noise, post.mean_constant))
    elif surrogate.variant == ModelVariant.SINGLE:
        gp = surrogate.gps[0]
        observed[0] = gp.y
        base = replace(surrogate, gps=(fit_posterior(np.vstack([gp.X, pending_X]),
                                                     np.concatenate([gp.y, placeholder]),
                                                     gp.hyperparams),))
    else:
        gps = []
        for m, gp in enumerate(surrogate.gps, start=1):
            observed[m] = gp.y
            sel = pending_m == m
            gps.append(fit_posterior(np.vstack([gp.X, pending_X[sel]]),
                                     np.concatenate([gp.y, placeholder[sel]]), gp.hyperparams))
        base = replace(surrogate, gps=tuple(gps))

    return [_append_targets(base, s, pending_m, observed) for s in samples]
