"""Tests for maximum-likelihood fitting and the Plug-in denoiser."""

import logging

import numpy as np
import pytest
from scipy.stats import norm

from core import SeededStream
from mixd import (
    BernoulliParams,
    BgParams,
    ScalarChannelSpec,
    bayes_denoise,
    bernoulli_log_likelihood,
    bg_log_likelihood,
    fit_bernoulli_ml,
    fit_bg_ml,
    fit_ml,
    grid_search_bernoulli_ml,
    plugin_denoise,
    sample_scalar_channel,
    sample_signal,
)
from mixd.types import floor_sigma2


def observe(model, n, sigma2, stream):
    x = sample_signal(model, n, stream)
    return x, sample_scalar_channel(x, ScalarChannelSpec(sigma_z2=sigma2), stream)


@pytest.fixture
def bg_data():
    model = BgParams(theta=0.1, mu=0.0, sigma_x2=1.0)
    _, y = observe(model, 5000, 0.1, SeededStream(master_seed=17))
    return y


class TestLogLikelihood:
    def test_empty_is_zero(self):
        assert bernoulli_log_likelihood(np.array([]), 0.3, 0.1) == 0.0

    def test_empty_support(self):
        assert bernoulli_log_likelihood(np.array([0.4]), 0.0, 0.1) == pytest.approx(
            norm.logpdf(0.4, 0.0, np.sqrt(0.1))
        )

    def test_bg_matches_densities(self):
        params = BgParams(theta=0.2, mu=0.5, sigma_x2=1.5)
        y = np.array([-1.0, 0.1, 2.3])
        direct = np.sum(
            np.log(
                0.2 * norm.pdf(y, 0.5, np.sqrt(1.6)) + 0.8 * norm.pdf(y, 0.0, np.sqrt(0.1))
            )
        )
        assert bg_log_likelihood(y, params, 0.1) == pytest.approx(direct, rel=1e-12)


class TestBernoulliFit:
    def test_matches_grid_search(self):
        """EM lands within one cell of a 1e-4 likelihood grid search."""
        model = BernoulliParams(theta=0.1)
        master = SeededStream(master_seed=99)
        for i in range(100):
            _, y = observe(model, 100, 0.1, master.spawn(i))
            fit = fit_bernoulli_ml(y, 0.1)
            theta, _ = grid_search_bernoulli_ml(y, 0.1)
            assert abs(fit.params.theta - theta) <= 1e-4 + 1e-12

    def test_log_likelihood_reported(self):
        _, y = observe(BernoulliParams(theta=0.2), 300, 0.1, SeededStream(master_seed=1))
        fit = fit_bernoulli_ml(y, 0.1)
        assert fit.converged
        assert fit.log_likelihood == pytest.approx(
            bernoulli_log_likelihood(y, fit.params.theta, 0.1)
        )

    def test_no_ascent_warnings(self, caplog):
        _, y = observe(BernoulliParams(theta=0.3), 500, 0.2, SeededStream(master_seed=2))
        with caplog.at_level(logging.WARNING, logger="mixd.fit"):
            fit_bernoulli_ml(y, 0.2)
        assert "decreased" not in caplog.text

    def test_noiseless_counts(self):
        x = np.zeros(250)
        x[SeededStream(master_seed=4).generator.permutation(250)[:37]] = 1.0
        fit = fit_bernoulli_ml(x, floor_sigma2(0.0))
        assert fit.params.theta == pytest.approx(37 / 250, abs=1e-12)
        assert fit.converged

    def test_single_midpoint_observation(self):
        fit = fit_bernoulli_ml(np.array([0.5]), 0.1)
        assert fit.params.theta == pytest.approx(0.5)

    def test_all_ones_reaches_boundary(self):
        fit = fit_bernoulli_ml(np.ones(200), 0.01)
        assert fit.params.theta == pytest.approx(1.0, abs=1e-6)

    def test_needs_data(self):
        with pytest.raises(ValueError):
            fit_bernoulli_ml(np.array([]), 0.1)


class TestBgFit:
    def test_recovers_parameters(self, bg_data):
        fit = fit_bg_ml(bg_data, 0.1)
        assert fit.params.theta == pytest.approx(0.1, abs=0.03)
        assert fit.params.mu == pytest.approx(0.0, abs=0.2)
        assert fit.params.sigma_x2 == pytest.approx(1.0, abs=0.3)

    def test_best_start_wins(self, bg_data):
        best = fit_bg_ml(bg_data, 0.1)
        for start in (0.1, 0.5, 0.9):
            single = fit_bg_ml(bg_data, 0.1, starts=(start,))
            assert single.log_likelihood <= best.log_likelihood + 1e-9

    def test_warm_start_keeps_optimum(self, bg_data):
        fit = fit_bg_ml(bg_data, 0.1)
        warm = fit_bg_ml(bg_data, 0.1, init=fit.params)
        assert warm.params.theta == pytest.approx(fit.params.theta, abs=1e-6)
        assert warm.iterations <= fit.iterations + 1

    def test_no_ascent_warnings(self, bg_data, caplog):
        with caplog.at_level(logging.WARNING, logger="mixd.fit"):
            fit_bg_ml(bg_data, 0.1)
            fit_bg_ml(bg_data[:200], 0.1)
        assert "decreased" not in caplog.text

    @pytest.mark.parametrize("seed", range(5))
    def test_pure_noise_gives_empty_support(self, seed):
        _, y = observe(BgParams(theta=0.0), 10_000, 0.1, SeededStream(master_seed=seed))
        fit = fit_bg_ml(y, 0.1)
        assert fit.params.theta <= 0.02

    @pytest.mark.slow
    def test_pure_noise_over_many_seeds(self):
        thetas = []
        for seed in range(100):
            _, y = observe(BgParams(theta=0.0), 10_000, 0.1, SeededStream(master_seed=1000 + seed))
            thetas.append(fit_bg_ml(y, 0.1).params.theta)
        assert max(thetas) <= 0.02

    def test_sparse_signal_keeps_support(self):
        _, y = observe(BgParams(theta=0.05), 2000, 0.1, SeededStream(master_seed=6))
        assert fit_bg_ml(y, 0.1).params.theta > 0.0

    def test_all_zero_observations(self):
        fit = fit_bg_ml(np.zeros(10), 0.1)
        assert fit.params.theta == 0.0
        assert fit.converged
        assert fit.iterations == 0

    def test_needs_two_observations(self):
        with pytest.raises(ValueError):
            fit_bg_ml(np.array([1.0]), 0.1)

    def test_dispatch(self, bg_data):
        assert isinstance(fit_ml(bg_data[:100], "bg", 0.1).params, BgParams)
        assert isinstance(fit_ml(bg_data[:100], "bernoulli", 0.1).params, BernoulliParams)


class TestPluginDenoise:
    def test_applies_bayes_at_fit(self, bg_data):
        out = plugin_denoise(bg_data, "bg", 0.1)
        fit = fit_bg_ml(bg_data, 0.1)
        assert out.params == fit.params
        reference = bayes_denoise(bg_data, fit.params, 0.1)
        np.testing.assert_array_equal(out.estimates, reference.estimates)
        assert out.mean_derivative == reference.mean_derivative


@pytest.mark.slow
class TestConsistency:
    def test_error_shrinks_like_inverse_root_n(self):
        model = BernoulliParams(theta=0.1)
        sizes = [100, 1000, 10_000]
        errors = []
        for n in sizes:
            master = SeededStream(master_seed=n)
            estimates = [
                fit_bernoulli_ml(observe(model, n, 0.1, master.spawn(i))[1], 0.1).params.theta
                for i in range(200)
            ]
            errors.append(np.mean(np.abs(np.array(estimates) - model.theta)))
        slope, _ = np.polyfit(np.log10(sizes), np.log10(errors), 1)
        assert slope == pytest.approx(-0.5, abs=0.2)
