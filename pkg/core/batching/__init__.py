"""Asynchronous batching strategies."""
from core.batching.penalization import (
    LocalPenalizer,
    PenalizerParams,
    build_penalizer,
    estimate_penalizer_params,
    hard_penalizer,
    penalized_acquisition,
    softplus,
)
from core.batching.fantasies import FantasyEnsemble, fantasized_acquisition
from core.batching.thompson import thompson_select
from core.batching.trust_region import (
    TrustRegion,
    init_trust_region,
    lengthscale_weights,
    turbo_propose,
    turbo_update,
)

__all__ = [
    'LocalPenalizer', 'PenalizerParams', 'build_penalizer', 'estimate_penalizer_params',
    'hard_penalizer', 'penalized_acquisition', 'softplus',
    'FantasyEnsemble', 'fantasized_acquisition', 'thompson_select',
    'TrustRegion', 'init_trust_region', 'lengthscale_weights', 'turbo_propose', 'turbo_update',
]
