"""Pytest fixtures."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from core.gp import GPHyperparams, KernelParams, fit_posterior
from core.gp.training import TrainConfig
from core.multifidelity import LMCParams, ModelVariant, MultiFidelitySurrogate, fit_multitask_posterior


@pytest.fixture
def temp_dir():
    """Create temporary directory."""
    tmp = tempfile.mkdtemp()
    yield Path(tmp)
    shutil.rmtree(tmp)


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(0)


@pytest.fixture
def make_gp():
    """Factory for a conditioned GP with fixed hyperparameters."""
    def factory(X, y, lengthscale=0.2, output_scale=1.0, noise=1e-2, mean=0.0):
        X = np.asarray(X, dtype=float)
        dim = X.shape[1] if X.ndim == 2 else 1
        hp = GPHyperparams(KernelParams(output_scale, np.full(dim, lengthscale)), noise, mean)
        return fit_posterior(X.reshape(-1, dim), y, hp)
    return factory


@pytest.fixture
def make_independent(make_gp):
    """Factory for an independent-GP surrogate from per-fidelity (X, y) pairs."""
    def factory(datasets, dim=1, **kwargs):
        gps = tuple(make_gp(np.asarray(X, dtype=float).reshape(-1, dim), y, **kwargs) for X, y in datasets)
        return MultiFidelitySurrogate(ModelVariant.INDEPENDENT, len(gps), dim, gps=gps)
    return factory


@pytest.fixture
def make_multitask():
    """Factory for a one-latent LMC surrogate with coregionalization B = AAᵀ + diag(v)."""
    def factory(X, fidelities, y, A, v, lengthscale=0.2, noise=1e-2, mean=0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        X = np.asarray(X, dtype=float)
        dim = X.shape[1] if X.ndim == 2 else 1
        params = LMCParams(kernels=(KernelParams(1.0, np.full(dim, lengthscale)),), A=(A,), v=(v,))
        n_fidelities = A.shape[0]
        post = fit_multitask_posterior(X.reshape(-1, dim), fidelities, y, params,
                                       np.full(n_fidelities, noise), mean)
        return MultiFidelitySurrogate(ModelVariant.MULTITASK, n_fidelities, dim, multitask=post)
    return factory


@pytest.fixture
def quick_train():
    """Short training schedule for tests that fit hyperparameters."""
    return TrainConfig(epochs=10)
