"""Tests for the AMP recursion."""

import numpy as np
import pytest
from pydantic import ValidationError

from core import DivergenceError, MixdDimensionError, NonFiniteError, SeededStream
from mixd import (
    AmpConfig,
    AmpState,
    BernoulliParams,
    BgParams,
    DenoiserKind,
    DenoiserOutput,
    MatrixChannelSpec,
    amp_run,
    amp_step,
    bayes_denoise,
    estimate_noise,
    make_amp_config,
    pseudo_data,
    sample_matrix_channel,
    sample_signal,
    se_fixed_point,
    se_trajectory,
    sigma_z2_from_snr,
)

BG = BgParams(theta=0.1, mu=0.0, sigma_x2=1.0)


def draw_problem(model, n, m, snr_db, seed):
    sigma_z2 = sigma_z2_from_snr(model, n, m, 10 ** (snr_db / 10))
    channel = MatrixChannelSpec(n=n, m=m, sigma_z2=sigma_z2)
    stream = SeededStream(master_seed=seed)
    x = sample_signal(model, n, stream)
    A, y = sample_matrix_channel(x, channel, stream)
    return channel, x, A, y


def average_mse(model, n, m, snr_db, seeds, iterations):
    config = make_amp_config("bayes", known_params=model, max_iters=iterations, tol=1e-300)
    curves = []
    for seed in seeds:
        channel, x, A, y = draw_problem(model, n, m, snr_db, seed)
        result = amp_run(A, y, channel, config, x_true=x)
        curves.append([h.mse for h in result.history[:iterations]])
    return channel, np.mean(curves, axis=0)


@pytest.fixture
def small_problem():
    return draw_problem(BG, 600, 300, 15.0, seed=42)


class TestPseudoData:
    def test_zero_residual(self):
        A = np.ones((2, 3))
        state = AmpState(x_t=np.array([1.0, 2.0, 3.0]), r_t=np.zeros(2), sigma_hat2=0.0)
        np.testing.assert_array_equal(pseudo_data(state, A, np.zeros(2)), [1.0, 2.0, 3.0])

    def test_identity_matrix(self):
        y = np.array([0.5, -1.0, 2.0])
        state = AmpState(x_t=np.zeros(3), r_t=y, sigma_hat2=estimate_noise(y))
        np.testing.assert_array_equal(pseudo_data(state, np.eye(3), y), y)

    def test_matches_naive_matvec(self):
        gen = SeededStream(master_seed=3).generator
        A = gen.standard_normal((7, 5))
        x, r = gen.standard_normal(5), gen.standard_normal(7)
        expected = np.array([sum(A[i, j] * r[i] for i in range(7)) + x[j] for j in range(5)])
        state = AmpState(x_t=x, r_t=r, sigma_hat2=1.0)
        np.testing.assert_allclose(pseudo_data(state, A, r), expected, rtol=1e-12)

    def test_dimension_mismatch(self):
        state = AmpState(x_t=np.zeros(4), r_t=np.zeros(2), sigma_hat2=0.0)
        with pytest.raises(MixdDimensionError):
            pseudo_data(state, np.ones((2, 3)), np.zeros(2))


class TestEstimateNoise:
    def test_values(self):
        assert estimate_noise(np.zeros(4)) == 0.0
        assert estimate_noise(np.array([3.0, 4.0])) == 12.5

    def test_needs_entries(self):
        with pytest.raises(ValueError):
            estimate_noise(np.array([]))


class TestAmpConfig:
    def test_mixd_default_grids(self):
        assert make_amp_config("mixd", family="bernoulli").grid.size == 201
        assert make_amp_config("mixd", family="bg").grid.size == 17**3

    def test_family_from_known_params(self):
        config = make_amp_config("plugin", known_params=BG, warm_start=True)
        assert config.plugin_family.value == "bg"
        assert config.warm_start

    def test_missing_inputs(self):
        with pytest.raises(ValidationError):
            AmpConfig(denoiser=DenoiserKind.BAYES)
        with pytest.raises(ValueError):
            make_amp_config("mixd")


class TestAmpStep:
    def test_identity_channel_reduces_to_denoising(self):
        model = BernoulliParams(theta=0.2)
        y = SeededStream(master_seed=8).generator.normal(0.2, 0.5, 50)
        state = AmpState(x_t=np.zeros(50), r_t=y.copy(), sigma_hat2=estimate_noise(y))
        config = make_amp_config("bayes", known_params=model)
        nxt = amp_step(state, np.eye(50), y, config)
        expected = bayes_denoise(y, model, estimate_noise(y))
        np.testing.assert_allclose(nxt.x_t, expected.estimates)
        assert nxt.t == 1
        assert nxt.mean_derivative == pytest.approx(expected.mean_derivative)

    def test_zero_signal_is_stable(self):
        channel = MatrixChannelSpec(n=100, m=60, sigma_z2=0.01)
        gen = SeededStream(master_seed=1).generator
        A = gen.standard_normal((60, 100)) / np.sqrt(60)
        z = 0.1 * gen.standard_normal(60)
        config = make_amp_config("bayes", known_params=BernoulliParams(theta=0.0))
        result = amp_run(A, z, channel, config)
        assert np.all(result.x_hat == 0.0)
        assert result.converged
        assert result.iterations == 1

    def test_non_finite_iterate(self, small_problem, mocker):
        channel, _, A, y = small_problem
        mocker.patch(
            "mixd.amp.denoise",
            return_value=DenoiserOutput(estimates=np.full(channel.n, np.nan), mean_derivative=0.0),
        )
        state = AmpState(x_t=np.zeros(channel.n), r_t=y.copy(), sigma_hat2=estimate_noise(y))
        with pytest.raises(NonFiniteError) as info:
            amp_step(state, A, y, make_amp_config("bayes", known_params=BG))
        assert info.value.iteration == 1


class TestAmpRun:
    def test_zero_measurements(self):
        channel = MatrixChannelSpec(n=80, m=40, sigma_z2=0.01)
        A = SeededStream(master_seed=2).generator.standard_normal((40, 80)) / np.sqrt(40)
        result = amp_run(A, np.zeros(40), channel, make_amp_config("mixd", family="bernoulli"))
        assert result.converged
        assert 1 <= result.iterations <= 2
        assert np.max(np.abs(result.x_hat)) < 1e-12

    def test_deterministic(self, small_problem):
        channel, x, A, y = small_problem
        config = make_amp_config("mixd", family="bg", grid_theta=5, grid_mu=5, grid_sigma=5)
        first = amp_run(A, y, channel, config, x_true=x)
        second = amp_run(A, y, channel, config, x_true=x)
        np.testing.assert_array_equal(first.x_hat, second.x_hat)
        assert [h.mse for h in first.history] == [h.mse for h in second.history]

    def test_recovers_sparse_signal(self, small_problem):
        channel, x, A, y = small_problem
        result = amp_run(A, y, channel, make_amp_config("bayes", known_params=BG), x_true=x)
        assert result.history[-1].mse < 0.2 * np.mean(x**2)

    def test_plugin_warm_start(self, small_problem):
        channel, x, A, y = small_problem
        config = make_amp_config("plugin", family="bg", warm_start=True, max_iters=30)
        result = amp_run(A, y, channel, config, x_true=x)
        assert np.all(np.isfinite(result.x_hat))
        assert len(result.history) == result.iterations

    def test_divergence_carries_history(self, small_problem, mocker):
        channel, _, A, y = small_problem
        mocker.patch(
            "mixd.amp.denoise",
            return_value=DenoiserOutput(estimates=np.full(channel.n, 50.0), mean_derivative=0.0),
        )
        with pytest.raises(DivergenceError) as info:
            amp_run(A, y, channel, make_amp_config("bayes", known_params=BG))
        assert len(info.value.history) == 1

    def test_shape_check(self, small_problem):
        channel, _, A, y = small_problem
        with pytest.raises(MixdDimensionError):
            amp_run(A[:, :-1], y, channel, make_amp_config("bayes", known_params=BG))

    def test_noise_estimate_matches_effective_noise(self):
        channel, x, A, y = draw_problem(BG, 5000, 2000, 10.0, seed=3)
        config = make_amp_config("bayes", known_params=BG)
        state = AmpState(x_t=np.zeros(channel.n), r_t=y.copy(), sigma_hat2=estimate_noise(y))
        for _ in range(5):
            state = amp_step(state, A, y, config)
        effective = np.mean((pseudo_data(state, A, y) - x) ** 2)
        assert state.sigma_hat2 == pytest.approx(effective, rel=0.1)

    def test_noise_estimate_decreases(self):
        channel, x, A, y = draw_problem(BG, 4000, 1600, 10.0, seed=5)
        result = amp_run(A, y, channel, make_amp_config("bayes", known_params=BG), x_true=x)
        levels = [h.sigma_hat2 for h in result.history]
        assert len(levels) > 2
        for before, after in zip(levels, levels[1:]):
            assert after <= before * 1.05

    def test_onsager_term_changes_trajectory(self):
        """Dropping the Onsager term at delta = 0.4 moves the per-iteration MSE."""
        channel, x, A, y = draw_problem(BG, 2000, 800, 10.0, seed=9)
        curves = {}
        for onsager in (True, False):
            config = make_amp_config(
                "bayes", known_params=BG, onsager=onsager, max_iters=10, tol=1e-300
            )
            try:
                history = amp_run(A, y, channel, config, x_true=x).history
            except DivergenceError as e:
                history = e.history
            curves[onsager] = [h.mse for h in history]
        with_term, without_term = curves[True], curves[False]
        assert with_term[0] == without_term[0]
        assert len(with_term) == 10 and len(without_term) >= 2
        gap = max(abs(a - b) / a for a, b in zip(with_term[1:], without_term[1:]))
        assert gap > 0.1

    def test_tracks_state_evolution(self):
        channel, mse = average_mse(BG, 4000, 1600, 10.0, seeds=range(5), iterations=10)
        predicted = [p.mse for p in se_trajectory(BG, channel.delta, channel.sigma_z2, 10)]
        np.testing.assert_allclose(mse, predicted, rtol=0.15)

    @pytest.mark.slow
    def test_tracks_state_evolution_full(self):
        channel, mse = average_mse(BG, 5000, 2000, 10.0, seeds=range(10), iterations=15)
        predicted = [p.mse for p in se_trajectory(BG, channel.delta, channel.sigma_z2, 15)]
        np.testing.assert_allclose(mse, predicted, rtol=0.10)

    @pytest.mark.slow
    def test_mixd_reaches_state_evolution_sdr(self):
        model = BernoulliParams(theta=0.03)
        config = make_amp_config("mixd", family="bernoulli")
        sdrs = []
        for seed in range(10):
            channel, x, A, y = draw_problem(model, 10_000, 3000, 10.0, seed)
            result = amp_run(A, y, channel, config, x_true=x)
            sdrs.append(10 * np.log10(np.var(x) / np.mean((result.x_hat - x) ** 2)))
        reference = se_fixed_point(model, channel.delta, channel.sigma_z2)
        assert np.mean(sdrs) == pytest.approx(reference.sdr_db, abs=0.5)
