"""Tests for local penalization, fantasies, Thompson sampling and the trust region."""

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.acquisition import ucb
from core.batching import (
    FantasyEnsemble,
    LocalPenalizer,
    PenalizerParams,
    estimate_penalizer_params,
    fantasized_acquisition,
    init_trust_region,
    lengthscale_weights,
    penalized_acquisition,
    thompson_select,
    turbo_propose,
    turbo_update,
)
from core.batching.penalization import build_penalizer, exclusion_radius
from core.batching.trust_region import EDGE_MIN, TrustRegion, region_candidates
from core.domain import BoxDomain, GridDomain
from core.exceptions import EstimationError, TrustRegionError
from core.gp import fit_posterior
from core.multifidelity import FidelityDataset, ModelVariant, MultiFidelitySurrogate


def _dataset(X, y, n_fidelities=1, fidelity=None):
    X = np.asarray(X, dtype=float)
    data = FidelityDataset(n_fidelities, X.shape[1])
    for x, value in zip(X, y):
        data.add(x, fidelity or n_fidelities, value)
    return data


# ---- local penalization ----

def test_penalizer_example():
    """Test ψ at distance 0.5 from the center of a 0.6 ball."""
    params = PenalizerParams(lipschitz=2.0, max_value=2.0)
    radius = exclusion_radius(1.0, 0.2, params)
    assert radius == pytest.approx(0.6)
    penalizer = LocalPenalizer(center=np.array([0.0, 0.0]), radius=radius)
    assert penalizer(np.array([[0.3, 0.4]]))[0] == pytest.approx(0.5 / 0.6)
    assert penalizer(np.array([[1.0, 1.0]]))[0] == 1.0
    assert penalizer(np.array([[0.0, 0.0]]))[0] == 0.0


def test_zero_radius_penalizes_only_center():
    """Test a degenerate ball zeroes the pending point alone."""
    penalizer = LocalPenalizer(center=np.array([0.5]), radius=0.0)
    np.testing.assert_array_equal(penalizer(np.array([[0.5], [0.50001]])), [0.0, 1.0])


def test_exclusion_radius_above_maximum():
    """Test a mean above P̂ leaves only the uncertainty term."""
    assert exclusion_radius(3.0, 0.4, PenalizerParams(lipschitz=4.0, max_value=2.0)) == pytest.approx(0.1)


def test_penalizer_params_validation():
    """Test a nonpositive Lipschitz estimate raises."""
    with pytest.raises(ValueError):
        PenalizerParams(lipschitz=0.0, max_value=1.0)


def test_penalized_acquisition_examples():
    """Test the identity and softplus transforms with two penalizers."""
    X = np.array([[0.0], [0.25], [1.0]])
    penalizers = [LocalPenalizer(np.array([0.0]), 0.5), LocalPenalizer(np.array([1.0]), 0.5)]
    positive = penalized_acquisition(np.array([2.0, 2.0, 2.0]), X, penalizers, positive=True)
    np.testing.assert_allclose(positive, [0.0, 1.0, 0.0])
    signed = penalized_acquisition(np.array([0.0, 0.0, 0.0]), X, penalizers, positive=False)
    np.testing.assert_allclose(signed, [0.0, 0.5 * np.log(2.0), 0.0])


@given(st.floats(-50, 50), st.floats(0, 1), st.floats(0.01, 2.0))
@settings(max_examples=50, deadline=None)
def test_penalty_factor_bounds(score, x, radius):
    """Test the penalized value never exceeds the transformed score and stays nonnegative."""
    penalizer = LocalPenalizer(np.array([0.5]), radius)
    value = penalized_acquisition(np.array([score]), np.array([[x]]), [penalizer], positive=False)[0]
    assert 0.0 <= value <= np.logaddexp(0.0, score) + 1e-12


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 2.0), st.floats(0, 2 * np.pi), st.floats(1.001, 5.0))
@settings(max_examples=200, deadline=None)
def test_penalizer_zero_at_center_and_one_outside(cx, cy, radius, angle, factor):
    """Test ψ vanishes at the pending point and is exactly 1 beyond the exclusion radius."""
    center = np.array([cx, cy])
    penalizer = LocalPenalizer(center, radius)
    outside = center + factor * radius * np.array([np.cos(angle), np.sin(angle)])
    inside = center + 0.5 * radius * np.array([np.cos(angle), np.sin(angle)])
    values = penalizer(np.vstack([center, outside, inside]))
    assert values[0] == 0.0
    assert values[1] == 1.0
    assert values[2] == pytest.approx(0.5)


def test_penalizing_the_argmax_moves_it(make_independent):
    """Test a pending point at the acquisition maximizer always changes the penalized maximizer."""
    grid = np.linspace(0, 1, 201)[:, None]
    domain = GridDomain(grid)
    checked = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        X = rng.random((4, 1))
        y = rng.normal(size=4)
        surrogate = make_independent([(X, y)], lengthscale=0.2)
        scores = ucb(grid, surrogate, 2.0)
        top = np.sort(scores)[-2:]
        if top[1] - top[0] <= 1e-12:
            continue
        best = int(np.argmax(scores))
        params = estimate_penalizer_params(surrogate, _dataset(X, y), grid[best], False, domain, rng)
        penalizer = build_penalizer(grid[best], surrogate, params)
        penalized = penalized_acquisition(scores, grid, [penalizer], positive=False)
        assert int(np.argmax(penalized)) != best
        checked += 1
    assert checked >= 95


def test_estimate_constant_data(make_independent):
    """Test flat data gives the Lipschitz floor and the observed maximum."""
    X = np.linspace(0, 1, 6)[:, None]
    y = np.full(6, 1.7)
    surrogate = make_independent([(X, y)], mean=1.7)
    params = estimate_penalizer_params(surrogate, _dataset(X, y), np.array([0.5]), False, BoxDomain(1),
                                       np.random.default_rng(0))
    assert params.max_value == pytest.approx(1.7)
    assert params.lipschitz == pytest.approx(1e-4)


def test_estimate_linear_slope(make_independent):
    """Test the Lipschitz estimate recovers the slope of linear data."""
    X = np.linspace(-0.3, 1.3, 15)[:, None]
    y = 3.0 * X[:, 0]
    surrogate = make_independent([(X, y)], lengthscale=0.3, noise=1e-4, mean=1.5)
    params = estimate_penalizer_params(surrogate, _dataset(X, y), np.array([0.5]), False, BoxDomain(1),
                                       np.random.default_rng(1))
    assert params.lipschitz == pytest.approx(3.0, rel=0.1)
    assert params.max_value == pytest.approx(y.max())


def test_local_estimate_bounded_by_global(make_independent):
    """Test the local Lipschitz estimate on a grid never exceeds the global one."""
    rng = np.random.default_rng(2)
    X = rng.random((8, 2))
    y = np.sin(5 * X[:, 0]) + X[:, 1]
    surrogate = make_independent([(X, y)], dim=2)
    domain = GridDomain(rng.random((300, 2)))
    x_j = domain.points[17]
    local = estimate_penalizer_params(surrogate, _dataset(X, y), x_j, True, domain, rng)
    global_ = estimate_penalizer_params(surrogate, _dataset(X, y), x_j, False, domain, rng)
    assert local.local and not global_.local
    assert local.lipschitz <= global_.lipschitz


def test_posterior_mean_max_estimator(make_independent):
    """Test the alternative P̂ is the largest posterior mean on the screen."""
    X = np.array([[0.2], [0.8]])
    y = np.array([0.5, 1.0])
    surrogate = make_independent([(X, y)])
    grid = GridDomain(np.linspace(0, 1, 11)[:, None])
    params = estimate_penalizer_params(surrogate, _dataset(X, y), np.array([0.5]), False, grid,
                                       np.random.default_rng(0), max_estimator='posterior_mean')
    assert params.max_value == pytest.approx(surrogate.predict_batch(grid.points, 1)[0].max())
    with pytest.raises(ValueError):
        estimate_penalizer_params(surrogate, _dataset(X, y), np.array([0.5]), False, grid,
                                  np.random.default_rng(0), max_estimator='median')


def test_estimate_without_data_raises(make_independent):
    """Test estimation needs observations at the fidelity."""
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))])
    with pytest.raises(EstimationError):
        estimate_penalizer_params(surrogate, FidelityDataset(1, 1), np.array([0.5]), False, BoxDomain(1),
                                  np.random.default_rng(0))


# ---- fantasies ----

def _ucb(surrogate, X, m):
    return ucb(X, surrogate, 2.0)


def test_fantasies_without_pending_are_exact(make_independent):
    """Test an empty pending set returns the plain acquisition."""
    surrogate = make_independent([(np.array([[0.2]]), np.array([0.4]))])
    X = np.linspace(0, 1, 5)[:, None]
    value = fantasized_acquisition(X, 1, surrogate, np.zeros((0, 1)), [], 10, 0, _ucb)
    np.testing.assert_allclose(value, ucb(X, surrogate, 2.0))


def test_single_fantasy_matches_refit(make_independent):
    """Test one fantasy equals conditioning on the fantasized value directly."""
    X1, y1 = np.array([[0.1], [0.5]]), np.array([0.2, -0.1])
    X2, y2 = np.array([[0.3]]), np.array([0.6])
    surrogate = make_independent([(X1, y1), (X2, y2)])
    pending = np.array([[0.7]])
    ensemble = FantasyEnsemble.build(surrogate, pending, [2], 1, seed=9)
    fantasy = ensemble.surrogates[0].gps[1].y[-1]

    refit_high = fit_posterior(np.vstack([X2, pending]), np.append(y2, fantasy), surrogate.gps[1].hyperparams)
    refit = MultiFidelitySurrogate(ModelVariant.INDEPENDENT, 2, 1, gps=(surrogate.gps[0], refit_high))
    X = np.linspace(0, 1, 7)[:, None]
    np.testing.assert_allclose(ensemble.average(_ucb, X, 2), ucb(X, refit, 2.0), atol=1e-8)


def test_fantasy_average_preserves_posterior_mean(make_independent):
    """Test the posterior mean averaged over many fantasies stays near the current mean."""
    surrogate = make_independent([(np.array([[0.2], [0.9]]), np.array([0.3, -0.4]))], lengthscale=0.3)
    ensemble = FantasyEnsemble.build(surrogate, np.array([[0.5]]), [1], 2000, seed=4)
    X = np.linspace(0, 1, 5)[:, None]

    def mean(s, X, m):
        return s.predict_batch(X, m)[0]

    np.testing.assert_allclose(ensemble.average(mean, X, 1), mean(surrogate, X, 1), atol=0.1)
    assert len(ensemble) == 2000


def test_fantasy_error_shrinks_with_more_fantasies(make_independent):
    """Test the averaged posterior mean approaches the exact one at roughly 1/√S."""
    surrogate = make_independent([(np.array([[0.1], [0.6], [0.9]]), np.array([0.3, -0.2, 0.5]))], lengthscale=0.3)
    pending = np.array([[0.35], [0.75]])
    X = np.linspace(0, 1, 9)[:, None]
    exact = surrogate.predict_batch(X, 1)[0]

    def mean(s, X, m):
        return s.predict_batch(X, m)[0]

    errors = {}
    for n_fantasies in (10, 100, 1000):
        deviations = [FantasyEnsemble.build(surrogate, pending, [1, 1], n_fantasies, seed).average(mean, X, 1) - exact
                      for seed in range(30)]
        errors[n_fantasies] = np.sqrt(np.mean(np.square(deviations)))

    assert errors[1000] < errors[100] < errors[10]
    # 1/√S predicts a ratio of 10
    assert 4.0 < errors[10] / errors[1000] < 25.0


# ---- Thompson sampling ----

def test_thompson_picks_clear_winner(make_independent):
    """Test a near-certain posterior selects its maximizer."""
    grid = np.array([[0.1], [0.5], [0.9]])
    surrogate = make_independent([(grid, np.array([0.0, 2.0, 0.0]))], lengthscale=0.05, noise=1e-6)
    for seed in range(5):
        np.testing.assert_array_equal(thompson_select(surrogate, grid, seed), [0.5])


def test_thompson_is_deterministic(make_independent):
    """Test the same seed gives the same point."""
    surrogate = make_independent([(np.array([[0.4]]), np.array([0.1]))])
    grid = np.linspace(0, 1, 30)[:, None]
    np.testing.assert_array_equal(thompson_select(surrogate, grid, 12), thompson_select(surrogate, grid, 12))


def test_thompson_splits_symmetric_choice(make_independent):
    """Test two independent, identical candidates are each chosen about half the time."""
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))], lengthscale=0.05)
    grid = np.array([[0.0], [1.0]])
    picks = [thompson_select(surrogate, grid, seed)[0] for seed in range(400)]
    assert 0.4 <= np.mean(picks) <= 0.6


# ---- trust region ----

@pytest.fixture
def surrogate_2d(make_independent):
    rng = np.random.default_rng(3)
    X = rng.random((6, 2))
    return make_independent([(X, X.sum(axis=1))], dim=2, lengthscale=0.3)


def test_trust_region_over_whole_grid_is_thompson(make_independent):
    """Test a region covering the grid reduces to Thompson sampling on it."""
    surrogate = make_independent([(np.array([[0.3]]), np.array([1.0]))])
    grid = np.linspace(0, 1, 10)[:, None]
    tr = TrustRegion(center=np.array([0.5]), best_value=1.0, edge=2.0)
    np.testing.assert_array_equal(turbo_propose(tr, surrogate, GridDomain(grid), seed=6),
                                  thompson_select(surrogate, grid, 6))


def test_tiny_region_stays_near_center(surrogate_2d):
    """Test proposals lie inside a small region."""
    tr = TrustRegion(center=np.array([0.3, 0.7]), best_value=0.0, edge=0.01)
    x = turbo_propose(tr, surrogate_2d, BoxDomain(2), seed=1, n_candidates=64)
    assert np.all(np.abs(x - tr.center) <= 0.005 + 1e-12)


def test_region_outside_domain_raises():
    """Test a region that misses the unit box raises."""
    tr = TrustRegion(center=np.array([1.5]), best_value=0.0, edge=0.8)
    with pytest.raises(TrustRegionError):
        region_candidates(tr, BoxDomain(1), seed=0)


def test_successes_double_edge():
    """Test three consecutive improvements double the edge."""
    tr = init_trust_region(2, 4)
    for value in (1.0, 2.0, 3.0):
        tr = turbo_update(tr, np.array([0.1 * value, 0.2]), value, 2, 2)
    assert tr.edge == pytest.approx(1.6)
    assert tr.success_count == 0
    assert tr.best_value == 3.0
    np.testing.assert_allclose(tr.center, [0.3, 0.2])


def test_failure_at_minimum_edge_restarts():
    """Test the edge resets once it halves below its minimum."""
    tr = replace(init_trust_region(2, 4, center=np.array([0.4, 0.4]), best_value=1.0),
                 edge=EDGE_MIN, failure_count=3)
    tr = turbo_update(tr, np.array([0.9, 0.9]), 0.5, 2, 2)
    assert tr.edge == pytest.approx(0.8)
    assert tr.restarts == 1
    np.testing.assert_allclose(tr.center, [0.4, 0.4])


def test_low_fidelity_leaves_region_unchanged():
    """Test only target-fidelity observations update the region."""
    tr = init_trust_region(2, 4)
    assert turbo_update(tr, np.array([0.1, 0.1]), 100.0, 1, 2) is tr


def test_center_waits_for_first_target_observation():
    """Test the region stays at the midpoint through low-fidelity arrivals, then jumps."""
    tr = init_trust_region(3, 4)
    rng = np.random.default_rng(2)
    for _ in range(10):
        tr = turbo_update(tr, rng.random(3), float(rng.normal()), 1, 2)
    np.testing.assert_array_equal(tr.center, [0.5, 0.5, 0.5])
    assert tr.best_value == -np.inf
    assert tr.edge == pytest.approx(0.8)

    tr = turbo_update(tr, np.array([0.1, 0.2, 0.3]), -5.0, 2, 2)
    np.testing.assert_array_equal(tr.center, [0.1, 0.2, 0.3])
    assert tr.best_value == -5.0


def test_failure_tolerance_scales_with_dimension():
    """Test ⌈max(4, d/batch)⌉."""
    assert init_trust_region(40, 4).failure_tolerance == 10
    assert init_trust_region(2, 4).failure_tolerance == 4


def test_lengthscale_weights_have_unit_geometric_mean():
    """Test per-dimension weights preserve the region volume."""
    weights = lengthscale_weights(np.array([0.1, 0.4, 1.6]))
    assert np.exp(np.mean(np.log(weights))) == pytest.approx(1.0)
    np.testing.assert_allclose(weights / weights[0], [1.0, 4.0, 16.0])
