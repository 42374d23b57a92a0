"""Multi-fidelity surrogates: independent GPs and the LMC multi-task model."""
from core.multifidelity.lmc import (
    LMCParams,
    MultiTaskPosterior,
    default_lmc_params,
    fit_multitask_posterior,
    lmc_gram,
    lmc_kernel,
)
from core.multifidelity.surrogate import (
    FidelityDataset,
    ModelVariant,
    MultiFidelitySurrogate,
    Observation,
    SurrogateConfig,
    condition_on,
    fantasize,
    fit_surrogate,
    predict,
    sample_on_grid,
    sample_paths,
)

__all__ = [
    'LMCParams', 'MultiTaskPosterior', 'default_lmc_params', 'fit_multitask_posterior',
    'lmc_gram', 'lmc_kernel',
    'FidelityDataset', 'ModelVariant', 'MultiFidelitySurrogate', 'Observation',
    'SurrogateConfig', 'condition_on', 'fantasize', 'fit_surrogate', 'predict',
    'sample_on_grid', 'sample_paths',
]
