"""Marginal-likelihood training with smoothed box priors."""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple
import logging

import numpy as np
import torch

from config.settings import Settings
from core.exceptions import NumericalError, TrainingError
from core.gp.exact_gp import GPHyperparams, HyperPriorBox, log_marginal_likelihood_grad
from core.gp.kernels import KernelParams

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]


def default_boxes() -> Dict[str, HyperPriorBox]:
    """Prior supports for unit-box inputs and quasi-normalized outputs."""
    return {
        'lengthscale': HyperPriorBox(0.025, 0.6),
        'output_scale': HyperPriorBox(0.05, 2.0),
        'noise': HyperPriorBox(1e-5, 0.2),
        'mean_constant': HyperPriorBox(-1.0, 1.0),
    }


@dataclass
class TrainConfig:
    """Optimizer settings and which parameter groups are trainable."""
    learning_rate: float = Settings.TRAIN_LEARNING_RATE
    epochs: int = Settings.TRAIN_EPOCHS
    penalty_weight: float = Settings.PRIOR_PENALTY_WEIGHT
    train_lengthscales: bool = True
    train_output_scale: bool = True
    train_noise: bool = True
    train_mean: bool = True
    boxes: Dict[str, HyperPriorBox] = field(default_factory=default_boxes)


def box_penalty(values: np.ndarray, lower: np.ndarray, upper: np.ndarray,
                weight: float) -> Tuple[float, np.ndarray]:
    """Quadratic penalty on the distance outside [lower, upper], with its gradient."""
    below = np.minimum(values - lower, 0.0)
    above = np.maximum(values - upper, 0.0)
    outside = below + above
    return float(weight * np.sum(outside ** 2)), 2.0 * weight * outside


def maximize_adam(objective: Objective, theta0: np.ndarray, mask: np.ndarray,
                  learning_rate: float, epochs: int,
                  project: Callable[[np.ndarray], np.ndarray]) -> Tuple[np.ndarray, float]:
    """
    Full-batch Adam ascent on an objective with analytic gradients.

    The best projected iterate is returned, so the result never scores below
    the projected starting point.

    Raises:
        TrainingError: when the objective stops being finite
    """
    best_theta = project(np.asarray(theta0, dtype=float))
    try:
        best_value = objective(best_theta)[0]
    except NumericalError as e:
        raise TrainingError(f"Objective not computable at the initial point: {e}",
                            last_params=best_theta) from e
    param = torch.nn.Parameter(torch.tensor(theta0, dtype=torch.float64))
    optimizer = torch.optim.Adam([param], lr=learning_rate)
    mask_t = torch.tensor(mask, dtype=torch.float64)

    for epoch in range(epochs):
        theta = param.detach().numpy().copy()
        try:
            value, grad = objective(theta)
        except NumericalError as e:
            raise TrainingError(f"Factorization failed at epoch {epoch}: {e}",
                                last_params=best_theta) from e
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            raise TrainingError(f"Objective diverged at epoch {epoch}", last_params=best_theta)

        projected = project(theta)
        if np.allclose(projected, theta, rtol=0.0, atol=0.0):
            projected_value = value
        else:
            try:
                projected_value = objective(projected)[0]
            except NumericalError:
                projected_value = -np.inf
        if projected_value > best_value:
            best_theta, best_value = projected, projected_value

        optimizer.zero_grad()
        param.grad = -torch.from_numpy(np.asarray(grad, dtype=float)) * mask_t
        optimizer.step()

    theta = param.detach().numpy().copy()
    projected = project(theta)
    try:
        final_value = objective(projected)[0]
        if final_value > best_value:
            best_theta, best_value = projected, final_value
    except NumericalError:
        pass
    return best_theta, float(best_value)


class GPParameterCodec:
    """Maps GPHyperparams to [log θ0, log ℓ, log η², μ0] and back."""

    def __init__(self, dim: int, boxes: Dict[str, HyperPriorBox]):
        self.dim = dim
        ls, os_, noise, mean = (boxes['lengthscale'], boxes['output_scale'],
                                boxes['noise'], boxes['mean_constant'])
        self.lower = np.concatenate([[np.log(os_.lower)], np.full(dim, np.log(ls.lower)),
                                     [np.log(noise.lower)], [mean.lower]])
        self.upper = np.concatenate([[np.log(os_.upper)], np.full(dim, np.log(ls.upper)),
                                     [np.log(noise.upper)], [mean.upper]])

    def pack(self, hp: GPHyperparams) -> np.ndarray:
        return np.concatenate([[np.log(hp.kernel.output_scale)],
                               np.log(hp.kernel.lengthscales),
                               [np.log(hp.noise_variance)],
                               [hp.mean_constant]])

    def unpack(self, theta: np.ndarray) -> GPHyperparams:
        d = self.dim
        return GPHyperparams(
            kernel=KernelParams(float(np.exp(theta[0])), np.exp(theta[1:1 + d])),
            noise_variance=float(np.exp(theta[1 + d])),
            mean_constant=float(theta[2 + d]),
        )

    def mask(self, config: TrainConfig) -> np.ndarray:
        return np.concatenate([[float(config.train_output_scale)],
                               np.full(self.dim, float(config.train_lengthscales)),
                               [float(config.train_noise)],
                               [float(config.train_mean)]])

    def project(self, theta: np.ndarray) -> np.ndarray:
        return np.clip(theta, self.lower, self.upper)


def penalized_objective(X, y, codec: GPParameterCodec, weight: float) -> Objective:
    """Marginal log-likelihood minus the smoothed-box penalty, in packed coordinates."""
    def objective(theta: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = log_marginal_likelihood_grad(X, y, codec.unpack(theta))
        penalty, penalty_grad = box_penalty(theta, codec.lower, codec.upper, weight)
        return value - penalty, grad - penalty_grad
    return objective


def fit_hyperparameters(X, y, init: GPHyperparams,
                        boxes: Optional[Dict[str, HyperPriorBox]] = None,
                        config: Optional[TrainConfig] = None) -> GPHyperparams:
    """
    Maximize the penalized marginal likelihood starting from `init`.

    Args:
        X: Training inputs, shape (N, d)
        y: Training targets, shape (N,)
        init: Starting hyperparameters; frozen groups keep these values
        boxes: Prior supports, defaults to default_boxes()
        config: Optimizer settings

    Returns:
        Hyperparameters projected into their boxes, scoring at least as well
        as the projected starting point

    Raises:
        ValueError: on empty data
        TrainingError: when the optimizer diverges
    """
    config = config or TrainConfig()
    boxes = boxes or config.boxes
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] == 0:
        raise ValueError("Hyperparameter fitting needs at least one observation")
    X = np.asarray(X, dtype=float).reshape(len(y), init.kernel.dim)

    codec = GPParameterCodec(init.kernel.dim, boxes)
    mask = codec.mask(config)
    theta0 = codec.pack(init)
    # frozen groups are pinned to their starting values
    frozen = mask == 0
    codec.lower = np.where(frozen, theta0, codec.lower)
    codec.upper = np.where(frozen, theta0, codec.upper)

    objective = penalized_objective(X, y, codec, config.penalty_weight)
    theta, value = maximize_adam(objective, theta0, mask, config.learning_rate,
                                 config.epochs, codec.project)
    logger.debug(f"GP training on {len(y)} points finished with objective {value:.4f}")
    return codec.unpack(theta)
