"""Tests for fidelity specifications and the two fidelity-selection rules."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.acquisition import MaxValueSampleSet
from core.batching import FantasyEnsemble
from core.fidelity import (
    DelayKind,
    DelayModel,
    FidelitySpec,
    ThresholdState,
    information_rule,
    update_thresholds,
    validate_fidelities,
    variance_rule,
)
from core.fidelity import fidelity_selector
from core.gp import GPHyperparams, KernelParams, fit_posterior
from core.multifidelity import LMCParams, ModelVariant, MultiFidelitySurrogate, fit_multitask_posterior


def _fstar(values):
    return MaxValueSampleSet(values=np.asarray(values, dtype=float), grid=np.zeros((1, 1)), seed=0)


def _independent(seed, n_fidelities=3):
    """Independent GPs with a different number of observations per fidelity."""
    rng = np.random.default_rng(seed)
    gps = []
    for m in range(n_fidelities):
        X = rng.random((m + 1, 1))
        hp = GPHyperparams(KernelParams(rng.uniform(0.2, 2.0), np.array([rng.uniform(0.05, 0.5)])), 1e-2)
        gps.append(fit_posterior(X, rng.normal(size=m + 1), hp))
    return MultiFidelitySurrogate(ModelVariant.INDEPENDENT, n_fidelities, 1, gps=tuple(gps))


def _correlated(seed):
    """Two-fidelity LMC surrogate with random coregionalization and data."""
    rng = np.random.default_rng(seed)
    params = LMCParams(kernels=(KernelParams(1.0, np.array([rng.uniform(0.1, 0.5)])),),
                       A=(rng.normal(size=(2, 1)),), v=(rng.uniform(0.01, 0.5, size=2),))
    X = rng.random((3, 1))
    post = fit_multitask_posterior(X, rng.integers(1, 3, size=3), rng.normal(size=3), params,
                                   np.full(2, 1e-2), 0.0)
    return MultiFidelitySurrogate(ModelVariant.MULTITASK, 2, 1, multitask=post)


# ---- specs ----

def test_fixed_delay_is_exact():
    assert DelayModel(5).sample(np.random.default_rng(0)) == 5


def test_random_delays_have_expected_mean():
    """Test Poisson and geometric delays average to their mean."""
    rng = np.random.default_rng(1)
    for kind in (DelayKind.POISSON, DelayKind.GEOMETRIC):
        model = DelayModel(4.0, kind)
        draws = [model.sample(rng) for _ in range(4000)]
        assert np.mean(draws) == pytest.approx(4.0, rel=0.1)


def test_delay_validation():
    with pytest.raises(ValueError):
        DelayModel(-1)
    with pytest.raises(ValueError):
        DelayModel(0.5, 'geometric')


def test_expected_delay_floor():
    """Test instant evaluations still take one step."""
    spec = FidelitySpec(cost=1.0, space=1.0, delay=DelayModel(0))
    assert spec.expected_delay() == 1.0


def test_spec_validation():
    """Test nonpositive costs and spaces and a cheap target raise."""
    with pytest.raises(ValueError):
        FidelitySpec(cost=0.0, space=1.0, delay=DelayModel(1))
    with pytest.raises(ValueError):
        FidelitySpec(cost=1.0, space=0.0, delay=DelayModel(1))
    with pytest.raises(ValueError):
        validate_fidelities([FidelitySpec(5.0, 1.0, DelayModel(1)), FidelitySpec(1.0, 1.0, DelayModel(5))])
    with pytest.raises(ValueError):
        validate_fidelities([])


# ---- variance rule ----

@pytest.mark.parametrize("gamma,expected", [(0.1, 2), (0.05, 1)])
def test_variance_rule_threshold(make_independent, gamma, expected):
    """Test √β·σ = 0.09 against thresholds on both sides."""
    empty = (np.zeros((0, 1)), np.zeros(0))
    surrogate = make_independent([empty, empty], output_scale=0.002025)
    state = ThresholdState.initial(2, gamma)
    assert variance_rule(np.array([0.5]), surrogate, 4.0, state) == expected


def test_variance_rule_single_fidelity(make_independent):
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))])
    assert variance_rule(np.array([0.5]), surrogate, 4.0, ThresholdState.initial(1)) == 1


def test_variance_rule_rejects_bad_beta(make_independent):
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))] * 2)
    with pytest.raises(ValueError):
        variance_rule(np.array([0.5]), surrogate, 0.0, ThresholdState.initial(2))


@given(st.integers(0, 10_000), st.floats(0, 1),
       st.lists(st.floats(1e-4, 4.0), min_size=2, max_size=2),
       st.lists(st.floats(0.0, 4.0), min_size=2, max_size=2))
@settings(max_examples=1000, deadline=None)
def test_variance_rule_monotone_in_thresholds(seed, x, gamma, raise_by):
    """Test raising any threshold never lowers the chosen fidelity."""
    surrogate = _independent(seed)
    low = ThresholdState(gamma=gamma, idle=[0, 0])
    high = ThresholdState(gamma=np.add(gamma, raise_by), idle=[0, 0])
    assert variance_rule(np.array([x]), surrogate, 4.0, low) <= variance_rule(np.array([x]), surrogate, 4.0, high)


@given(st.integers(0, 10_000), st.floats(0, 1), st.floats(0.1, 10.0))
@settings(max_examples=1000, deadline=None)
def test_variance_rule_threshold_limits(seed, x, beta):
    """Test infinite thresholds pick the target and vanishing ones the cheapest fidelity."""
    surrogate = _independent(seed)
    x = np.array([x])
    assert variance_rule(x, surrogate, beta, ThresholdState.initial(3, np.inf)) == 3
    assert variance_rule(x, surrogate, beta, ThresholdState.initial(3, 1e-12)) == 1


# ---- threshold doubling ----

def test_thresholds_reset_by_target_queries():
    """Test activity at the top fidelity never raises a threshold."""
    state = update_thresholds(ThresholdState.initial(2, 0.1), [1.0, 10.0], [[2]] * 50)
    np.testing.assert_allclose(state.gamma, [0.1])
    assert state.idle[0] == 0


def test_thresholds_double_after_delay_ratio():
    """Test a threshold doubles once idle ticks exceed E[τ^(m+1)]/E[τ^(m)]."""
    state = ThresholdState.initial(2, 0.1)
    state = update_thresholds(state, [1.0, 10.0], [[1]] * 10)
    assert state.gamma[0] == pytest.approx(0.1)
    state = update_thresholds(state, [1.0, 10.0], [[1]])
    assert state.gamma[0] == pytest.approx(0.2)
    state = update_thresholds(state, [1.0, 10.0], [[1]] * 11)
    assert state.gamma[0] == pytest.approx(0.4)


def test_empty_ticks_count_as_idle():
    """Test ticks without any query advance the counters."""
    state = update_thresholds(ThresholdState.initial(3, 0.1), [1.0, 2.0, 8.0], [[]] * 3)
    np.testing.assert_allclose(state.gamma, [0.2, 0.1])
    np.testing.assert_array_equal(state.idle, [0, 3])


@given(st.lists(st.lists(st.integers(1, 3), max_size=3), max_size=40))
@settings(max_examples=50, deadline=None)
def test_thresholds_never_decrease(activity):
    state = ThresholdState.initial(3, 0.1)
    updated = update_thresholds(state, [1.0, 3.0, 9.0], activity)
    assert np.all(updated.gamma >= state.gamma)


def test_threshold_state_validation():
    with pytest.raises(ValueError):
        ThresholdState(gamma=[0.0], idle=[0])
    with pytest.raises(ValueError):
        ThresholdState(gamma=[0.1, 0.1], idle=[0])


# ---- information rule ----

def test_information_rule_single_fidelity(make_independent):
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))])
    assert information_rule(np.array([0.5]), surrogate, np.zeros((0, 1)), [], _fstar([1.0]), [1.0], 4, 0) == 1


def test_information_rule_prefers_cheap_correlated_fidelity(make_multitask):
    """Test a perfectly correlated fidelity with a tenth of the delay wins."""
    surrogate = make_multitask(np.array([[0.2]]), np.array([2]), np.array([0.0]),
                               np.array([[1.0], [1.0]]), np.array([0.0, 0.0]), noise=1e-2)
    choice = information_rule(np.array([0.7]), surrogate, np.zeros((0, 1)), [], _fstar([1.0, 1.5]),
                              [1.0, 10.0], 4, seed=0)
    assert choice == 1


def test_information_rule_ignores_uncorrelated_fidelity(make_independent):
    """Test an uncorrelated cheap fidelity carries no information about the maximum."""
    empty = (np.zeros((0, 1)), np.zeros(0))
    surrogate = make_independent([empty, empty])
    choice = information_rule(np.array([0.7]), surrogate, np.zeros((0, 1)), [], _fstar([1.0, 1.5]),
                              [1.0, 10.0], 4, seed=0)
    assert choice == 2


def test_information_rule_delay_count_mismatch(make_independent):
    empty = (np.zeros((0, 1)), np.zeros(0))
    surrogate = make_independent([empty, empty])
    with pytest.raises(ValueError):
        information_rule(np.array([0.7]), surrogate, np.zeros((0, 1)), [], _fstar([1.0]), [1.0], 4, 0)


@given(st.integers(0, 10_000), st.floats(0, 1), st.lists(st.floats(0.5, 20.0), min_size=2, max_size=2),
       st.floats(0.1, 2.0))
@settings(max_examples=1000, deadline=None)
def test_information_rule_invariant_to_delay_scale(seed, x, delays, headroom):
    """Test doubling every expected delay leaves the chosen fidelity unchanged."""
    surrogate = _correlated(seed)
    ensemble = FantasyEnsemble([surrogate])
    fstar = _fstar([headroom, 2 * headroom])
    x = np.array([x])
    no_pending = np.zeros((0, 1))
    once = information_rule(x, surrogate, no_pending, [], fstar, delays, 1, seed, ensemble=ensemble)
    doubled = information_rule(x, surrogate, no_pending, [], fstar, [2 * d for d in delays], 1, seed,
                               ensemble=ensemble)
    assert once == doubled


def test_information_rule_ties_go_to_highest_fidelity(monkeypatch):
    """Test the largest index among equal maxima is chosen."""
    surrogate = _independent(0)
    ensemble = FantasyEnsemble([surrogate])
    rng = np.random.default_rng(0)
    current = {}
    monkeypatch.setattr(fidelity_selector, 'information_scores', lambda *args: current['scores'])
    for _ in range(1000):
        current['scores'] = rng.integers(0, 3, size=3).astype(float)
        expected = int(np.flatnonzero(current['scores'] == current['scores'].max())[-1]) + 1
        choice = information_rule(np.array([0.5]), surrogate, np.zeros((0, 1)), [], _fstar([1.0]),
                                  [1.0, 2.0, 4.0], 1, 0, ensemble=ensemble)
        assert choice == expected
