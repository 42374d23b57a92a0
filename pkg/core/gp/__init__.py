"""Exact Gaussian-process regression."""
from core.gp.kernels import KernelParams, rbf_kernel, rbf_gram
from core.gp.exact_gp import (
    GPHyperparams,
    HyperPriorBox,
    PosteriorGP,
    fit_posterior,
    log_marginal_likelihood,
    log_marginal_likelihood_grad,
    posterior_covariance,
    posterior_gradient_mean,
    posterior_predict,
    posterior_gradient_mean_batch,
    predict_batch,
    stable_cholesky,
    with_targets,
)
from core.gp.training import TrainConfig, default_boxes, fit_hyperparameters

__all__ = [
    'KernelParams', 'rbf_kernel', 'rbf_gram',
    'GPHyperparams', 'HyperPriorBox', 'PosteriorGP', 'fit_posterior',
    'log_marginal_likelihood', 'log_marginal_likelihood_grad', 'posterior_covariance',
    'posterior_gradient_mean', 'posterior_gradient_mean_batch', 'posterior_predict',
    'predict_batch', 'stable_cholesky', 'with_targets',
    'TrainConfig', 'default_boxes', 'fit_hyperparameters',
]
