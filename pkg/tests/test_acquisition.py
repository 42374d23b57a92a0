"""Tests for UCB, max-value entropy search and the acquisition optimizer."""

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import norm

from core.acquisition import (
    BetaSchedule,
    BiasBounds,
    OptimizerConfig,
    UCBConfig,
    mes,
    mes_gain,
    mf_mes_score,
    mf_ucb,
    optimize_acquisition,
    sample_max_values,
    ucb,
)
from core.acquisition.ucb import ucb_from_moments
from core.domain import BoxDomain, GridDomain
from core.multifidelity import ModelVariant, MultiFidelitySurrogate


def _empty_surrogate(make_gp, means, output_scale=0.25):
    gps = tuple(make_gp(np.zeros((0, 1)), np.zeros(0), output_scale=output_scale, mean=m) for m in means)
    return MultiFidelitySurrogate(ModelVariant.INDEPENDENT, len(gps), 1, gps=gps)


# ---- UCB ----

def test_ucb_from_moments_example():
    """Test μ + √β·σ on a hand-computed case."""
    value = ucb_from_moments(np.array([1.0]), np.array([0.25]), 4.0)
    assert value[0] == pytest.approx(2.0)


def test_ucb_rejects_nonpositive_beta():
    """Test β ≤ 0 raises."""
    with pytest.raises(ValueError):
        ucb_from_moments(np.array([0.0]), np.array([1.0]), 0.0)
    with pytest.raises(ValueError):
        UCBConfig(beta=-1.0)


def test_ucb_uses_target_fidelity(make_gp):
    """Test single-fidelity UCB reads the highest fidelity."""
    surrogate = _empty_surrogate(make_gp, [4.0, 2.2])
    np.testing.assert_allclose(ucb(np.array([[0.5]]), surrogate, 4.0), [3.2])


def test_mf_ucb_takes_tightest_bound(make_gp):
    """Test the minimum over fidelity bounds μ + √β·σ + ζ."""
    surrogate = _empty_surrogate(make_gp, [4.0, 2.2])
    value = mf_ucb(np.array([[0.5]]), surrogate, BiasBounds([0.5, 0.0]), 4.0)
    assert value[0] == pytest.approx(3.2)

    surrogate = _empty_surrogate(make_gp, [2.0, 4.0])
    value = mf_ucb(np.array([[0.5]]), surrogate, BiasBounds([0.1, 0.0]), 4.0)
    assert value[0] == pytest.approx(3.1)


def test_mf_ucb_ignores_hugely_biased_fidelity(make_gp):
    """Test a very large bias bound leaves only the target bound."""
    surrogate = _empty_surrogate(make_gp, [-5.0, 2.2])
    X = np.array([[0.1], [0.9]])
    np.testing.assert_allclose(mf_ucb(X, surrogate, BiasBounds([1e6, 0.0]), 4.0), ucb(X, surrogate, 4.0))


def test_mf_ucb_single_fidelity_reduces_to_ucb(make_independent):
    """Test M = 1 multi-fidelity UCB equals plain UCB."""
    surrogate = make_independent([(np.array([[0.2], [0.7]]), np.array([0.5, -0.3]))])
    X = np.linspace(0, 1, 6)[:, None]
    np.testing.assert_allclose(mf_ucb(X, surrogate, BiasBounds([0.0]), 2.0), ucb(X, surrogate, 2.0))


def test_mf_ucb_bias_count_mismatch(make_gp):
    """Test bias bounds must match the number of fidelities."""
    surrogate = _empty_surrogate(make_gp, [0.0, 0.0])
    with pytest.raises(ValueError):
        mf_ucb(np.array([[0.5]]), surrogate, BiasBounds([0.0]), 1.0)


@pytest.mark.parametrize("zeta", [[-0.1, 0.0], [0.1, 0.2, 0.0], [0.2, 0.1]])
def test_bias_bounds_validation(zeta):
    """Test negative, increasing and nonzero-target bias bounds raise."""
    with pytest.raises(ValueError):
        BiasBounds(zeta)


def test_logarithmic_beta_schedule():
    """Test β_t = 0.2·d·log(2t) and the fixed schedule."""
    config = UCBConfig(beta=3.0, schedule=BetaSchedule.LOGARITHMIC)
    assert config.beta_t(5, 2) == pytest.approx(0.4 * np.log(10.0))
    assert UCBConfig(beta=3.0).beta_t(5, 2) == 3.0


# ---- MES ----

def _entropy_gain_oracle(mu_m, var_m, mu_M, var_M, cov, noise, fstar, n_points=100_001):
    """
    Entropy of y = f^(m)(x) + ε minus its entropy once f^(M)(x) ≤ f* is known,
    by dense quadrature over y.
    """
    s2 = var_m + noise
    y = np.linspace(mu_m - 12 * np.sqrt(s2), mu_m + 12 * np.sqrt(s2), n_points)
    cond_sd = np.sqrt(var_M - cov ** 2 / s2)
    gamma = (fstar - mu_M) / np.sqrt(var_M)
    h = (fstar - mu_M - cov / s2 * (y - mu_m)) / cond_sd
    q = norm.pdf(y, mu_m, np.sqrt(s2)) * norm.cdf(h) / norm.cdf(gamma)
    plogp = np.where(q > 0, q * np.log(np.where(q > 0, q, 1.0)), 0.0)
    return 0.5 * np.log(2 * np.pi * np.e * s2) + trapezoid(plogp, y)


def _random_moments(seed):
    """Target-fidelity moments on even seeds, a correlated lower fidelity on odd ones."""
    rng = np.random.default_rng(seed)
    mu_M, var_M = rng.normal(), rng.uniform(0.1, 2.0)
    noise = rng.uniform(0.01, 0.5)
    fstar = mu_M + rng.uniform(-1.5, 2.5) * np.sqrt(var_M)
    if seed % 2 == 0:
        return mu_M, var_M, mu_M, var_M, var_M, noise, fstar
    mu_m, var_m = rng.normal(), rng.uniform(0.1, 2.0)
    cov = rng.uniform(-0.95, 0.95) * np.sqrt(var_m * var_M)
    return mu_m, var_m, mu_M, var_M, cov, noise, fstar


@pytest.mark.parametrize("noise", [0.5, 0.01])
def test_mes_gain_matches_entropy_difference(noise):
    """Test the closed form against dense quadrature of both entropies."""
    mu, var, fstar = 0.3, 0.5, 1.0
    gain = mes_gain(mu, var, mu, var, var, noise, np.array([fstar]))
    assert gain == pytest.approx(_entropy_gain_oracle(mu, var, mu, var, var, noise, fstar), rel=1e-3, abs=1e-5)


@pytest.mark.parametrize("seed", range(25))
def test_mes_gain_matches_oracle_on_random_moments(seed):
    """Test random target and correlated lower-fidelity moments against the dense oracle."""
    mu_m, var_m, mu_M, var_M, cov, noise, fstar = _random_moments(seed)
    gain = mes_gain(mu_m, var_m, mu_M, var_M, cov, noise, np.array([fstar]), clamp=False)
    expected = _entropy_gain_oracle(mu_m, var_m, mu_M, var_M, cov, noise, fstar)
    assert gain == pytest.approx(expected, rel=1e-3, abs=1e-5)


def test_mes_gain_zero_variance():
    """Test a degenerate posterior carries no information."""
    assert mes_gain(0.0, 0.0, 0.0, 0.0, 0.0, 0.01, np.array([1.0])) == 0.0


def test_mes_gain_far_maximum():
    """Test a maximum far above the posterior gives almost no gain."""
    assert mes_gain(0.3, 0.5, 0.3, 0.5, 0.5, 0.01, np.array([20.0])) <= 1e-6


def test_mes_gain_nonnegative_before_clamp():
    """Test the unclamped gain is nonnegative up to quadrature error."""
    for seed in range(100):
        mu_m, var_m, mu_M, var_M, cov, noise, fstar = _random_moments(1000 + seed)
        assert mes_gain(mu_m, var_m, mu_M, var_M, cov, noise, np.array([fstar]), clamp=False) >= -1e-6


def test_mes_gain_decreases_with_maximum():
    """Test a higher sampled maximum means less to learn about it."""
    mu, var, noise = 0.0, 1.0, 0.1
    gains = [mes_gain(mu, var, mu, var, var, noise, np.array([gamma])) for gamma in (-1.0, 0.0, 0.5, 1.0, 2.0, 3.0)]
    assert np.all(np.diff(gains) < 0)


def test_mes_gain_low_fidelity_uses_correlation():
    """Test an uncorrelated fidelity gives zero gain and a correlated one a positive gain."""
    fstar = np.array([1.0])
    assert mes_gain(0.0, 1.0, 0.3, 0.5, 0.0, 0.01, fstar) == pytest.approx(0.0, abs=1e-6)
    assert mes_gain(0.0, 1.0, 0.3, 0.5, 0.6, 0.01, fstar) > 1e-3


def test_sample_max_values_is_seeded(make_independent):
    """Test equal seeds give equal maxima."""
    surrogate = make_independent([(np.array([[0.3]]), np.array([0.5]))])
    grid = np.linspace(0, 1, 40)[:, None]
    a = sample_max_values(surrogate, grid, 8, seed=5)
    b = sample_max_values(surrogate, grid, 8, seed=5)
    np.testing.assert_array_equal(a.values, b.values)
    assert len(a) == 8


def test_sample_max_values_under_prior_exceed_mean(make_independent):
    """Test maxima of prior paths average above the prior mean."""
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))])
    fstar = sample_max_values(surrogate, np.linspace(0, 1, 50)[:, None], 20, seed=1)
    assert fstar.values.mean() > 0.0


def test_sample_max_values_requires_samples(make_independent):
    """Test a nonpositive sample count raises."""
    surrogate = make_independent([(np.zeros((0, 1)), np.zeros(0))])
    with pytest.raises(ValueError):
        sample_max_values(surrogate, np.linspace(0, 1, 5)[:, None], 0, seed=1)


def test_mf_mes_score_divides_by_cost(make_independent):
    """Test the multi-fidelity score is the gain per unit cost."""
    surrogate = make_independent([(np.array([[0.2]]), np.array([0.1])),
                                  (np.array([[0.8]]), np.array([0.4]))])
    fstar = sample_max_values(surrogate, np.linspace(0, 1, 20)[:, None], 5, seed=2)
    X = np.array([[0.3], [0.6]])
    np.testing.assert_allclose(mf_mes_score(X, 2, surrogate, fstar, 4.0), mes(X, 2, surrogate, fstar) / 4.0)
    with pytest.raises(ValueError):
        mf_mes_score(X, 2, surrogate, fstar, 0.0)


# ---- optimizer ----

def test_optimizer_constant_score_keeps_first_screen_point():
    """Test ties go to the first screened point and refinement needs a strict gain."""
    config = OptimizerConfig(n_screen=50, n_restarts=3, epochs=5)
    x = optimize_acquisition(lambda X: np.zeros(len(X)), BoxDomain(2), config, np.random.default_rng(3))
    expected = np.random.default_rng(3).random((50, 2))[0]
    np.testing.assert_allclose(x, expected)


def test_optimizer_finds_quadratic_peak():
    """Test refinement reaches the maximum of a smooth score."""
    config = OptimizerConfig(n_screen=200, n_restarts=2, epochs=50)
    x = optimize_acquisition(lambda X: -np.sum((X - 0.3) ** 2, axis=1), BoxDomain(2), config,
                             np.random.default_rng(0))
    np.testing.assert_allclose(x, [0.3, 0.3], atol=0.02)


def test_optimizer_enumerates_grid():
    """Test grid domains return the best row, lowest index on ties."""
    grid = np.array([[0.1, 0.1], [0.5, 0.5], [0.9, 0.9], [0.5, 0.5]])
    config = OptimizerConfig(n_screen=10, n_restarts=1, epochs=5)
    x = optimize_acquisition(lambda X: -np.abs(X[:, 0] - 0.5), GridDomain(grid), config,
                             np.random.default_rng(0))
    np.testing.assert_array_equal(x, [0.5, 0.5])


def test_optimizer_ignores_nonfinite_scores():
    """Test NaN scores never win."""
    grid = np.array([[0.1], [0.2], [0.3]])
    scores = lambda X: np.where(X[:, 0] < 0.15, np.nan, X[:, 0])
    x = optimize_acquisition(scores, grid, OptimizerConfig(), np.random.default_rng(0))
    np.testing.assert_array_equal(x, [0.3])


def test_optimizer_empty_grid_raises():
    """Test an empty candidate set raises."""
    with pytest.raises(ValueError):
        optimize_acquisition(lambda X: np.zeros(len(X)), np.zeros((0, 2)), OptimizerConfig(),
                             np.random.default_rng(0))
