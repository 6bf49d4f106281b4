"""Tests for the MMSE, state-evolution and brute-force oracles."""

import numpy as np
import pytest

from core import ConvergenceError, SeededStream
from mixd import (
    BernoulliParams,
    BgParams,
    Family,
    ParamGrid,
    bayes_denoise,
    mixd_bruteforce,
    prior_variance,
    scalar_mmse,
    scalar_mmse_mc,
    sdr_db,
    se_fixed_point,
    se_step,
    se_trajectory,
    sigma_z2_from_snr,
)
from mixd.oracle import SDR_CAP_DB, se_start
from mixd.types import SIGMA2_FLOOR

BERNOULLI = BernoulliParams(theta=0.05)
BG = BgParams(theta=0.1, mu=0.0, sigma_x2=1.0)


@pytest.fixture
def bg_channel():
    """delta = 0.4 at 10 dB SNR."""
    return 0.4, sigma_z2_from_snr(BG, 5000, 2000, 10.0)


class TestScalarMmse:
    def test_empty_support(self):
        assert scalar_mmse(BernoulliParams(theta=0.0), 0.1) == 0.0
        assert scalar_mmse(BgParams(theta=0.0), 0.1) == 0.0

    def test_gaussian_closed_form(self):
        model = BgParams(theta=1.0, mu=0.3, sigma_x2=1.0)
        assert scalar_mmse(model, 1.0) == pytest.approx(0.5, rel=1e-8)

    def test_bounded_and_monotone(self):
        sigmas = np.logspace(-3, 3, 25)
        values = [scalar_mmse(BERNOULLI, s) for s in sigmas]
        assert all(v <= prior_variance(BERNOULLI) * (1 + 1e-8) for v in values)
        assert all(b >= a * (1 - 1e-8) for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("model", [BERNOULLI, BG])
    def test_zero_noise_is_floored(self, model):
        value = scalar_mmse(model, 0.0)
        assert np.isfinite(value)
        assert 0.0 <= value <= 1e-20

    def test_large_noise_approaches_prior_variance(self):
        assert scalar_mmse(BERNOULLI, 1e4) == pytest.approx(prior_variance(BERNOULLI), rel=1e-2)

    @pytest.mark.parametrize(
        "model,sigma2", [(BERNOULLI, 0.1), (BG, 0.1), (BgParams(theta=0.3, mu=1.0), 0.5)]
    )
    def test_matches_monte_carlo(self, model, sigma2):
        estimate, stderr = scalar_mmse_mc(model, sigma2, 1_000_000, SeededStream(master_seed=77))
        assert abs(scalar_mmse(model, sigma2) - estimate) <= 4 * stderr

    @pytest.mark.slow
    def test_matches_monte_carlo_random_draws(self):
        draws = SeededStream(master_seed=123).generator
        for i in range(10):
            model = BgParams(
                theta=draws.uniform(0.02, 0.5),
                mu=draws.uniform(-2.0, 2.0),
                sigma_x2=draws.uniform(0.1, 4.0),
            )
            sigma2 = draws.uniform(0.01, 1.0)
            estimate, stderr = scalar_mmse_mc(
                model, sigma2, 10_000_000, SeededStream(master_seed=500 + i)
            )
            assert abs(scalar_mmse(model, sigma2) - estimate) <= 3 * stderr


class TestStateEvolution:
    def test_identity_step(self):
        assert se_step(BERNOULLI, 0.3, 2.0, 0.1, "identity") == pytest.approx(0.25)

    def test_bayes_step_empty_support(self):
        assert se_step(BernoulliParams(theta=0.0), 0.3, 0.5, 0.1) == 0.1

    def test_bayes_step_uses_mmse(self):
        expected = 0.0095 + scalar_mmse(BERNOULLI, 0.1) / 0.5
        assert se_step(BERNOULLI, 0.1, 0.5, 0.0095) == pytest.approx(expected)

    def test_zero_noise_step_is_floored(self):
        expected = SIGMA2_FLOOR + scalar_mmse(BERNOULLI, 0.1) / 0.5
        assert se_step(BERNOULLI, 0.1, 0.5, 0.0) == pytest.approx(expected)
        assert se_start(BERNOULLI, 0.5, 0.0) == pytest.approx(prior_variance(BERNOULLI) / 0.5)

    def test_rejects_non_positive_rate(self):
        with pytest.raises(ValueError):
            se_step(BERNOULLI, 0.1, 0.0, 0.1)

    @pytest.mark.parametrize("delta", [1.5, 2.0, 3.0, 10.0])
    def test_identity_fixed_point(self, delta):
        fixed = se_fixed_point(BERNOULLI, delta, 0.1, "identity")
        assert fixed.sigma_inf2 == pytest.approx(0.1 * delta / (delta - 1), rel=1e-11)

    def test_identity_diverges_below_unit_rate(self):
        with pytest.raises(ConvergenceError) as info:
            se_fixed_point(BERNOULLI, 0.5, 0.1, "identity")
        assert info.value.last_iterate is not None

    def test_empty_support_is_capped(self):
        fixed = se_fixed_point(BernoulliParams(theta=0.0), 0.5, 0.1)
        assert fixed.mmse == 0.0
        assert fixed.sdr_db == SDR_CAP_DB
        assert fixed.sigma_inf2 == pytest.approx(0.1)

    def test_noiseless_channel(self):
        fixed = se_fixed_point(BERNOULLI, 1.0, 0.0)
        assert fixed.sigma_inf2 >= SIGMA2_FLOOR
        assert fixed.mmse <= 1e-25
        assert fixed.sdr_db > 200.0

    def test_noiseless_empty_support(self):
        fixed = se_fixed_point(BernoulliParams(theta=0.0), 0.5, 0.0)
        assert fixed.sigma_inf2 == SIGMA2_FLOOR
        assert fixed.mmse == 0.0
        assert fixed.sdr_db == SDR_CAP_DB

    def test_noiseless_trajectory_stays_positive(self):
        points = se_trajectory(BERNOULLI, 1.0, 0.0, 20)
        assert all(p.sigma_t2 >= SIGMA2_FLOOR for p in points)

    def test_trajectory_is_nonincreasing(self, bg_channel):
        delta, sigma_z2 = bg_channel
        points = se_trajectory(BG, delta, sigma_z2, 30)
        assert points[0].sigma_t2 == pytest.approx(se_start(BG, delta, sigma_z2))
        for before, after in zip(points, points[1:]):
            assert after.sigma_t2 <= before.sigma_t2 * (1 + 1e-10)
            assert after.sigma_t2 >= sigma_z2

    def test_fixed_point_is_stable(self, bg_channel):
        delta, sigma_z2 = bg_channel
        fixed = se_fixed_point(BG, delta, sigma_z2)
        for factor in (1 - 1e-6, 1 + 1e-6):
            again = se_fixed_point(BG, delta, sigma_z2, sigma0_2=fixed.sigma_inf2 * factor)
            assert again.sigma_inf2 == pytest.approx(fixed.sigma_inf2, rel=1e-9)

    def test_fixed_point_report(self, bg_channel):
        delta, sigma_z2 = bg_channel
        fixed = se_fixed_point(BG, delta, sigma_z2)
        assert fixed.mmse == pytest.approx(scalar_mmse(BG, fixed.sigma_inf2))
        assert fixed.sdr_db == pytest.approx(10 * np.log10(prior_variance(BG) / fixed.mmse))
        assert fixed.sdr_db > 0.0


class TestSdr:
    def test_cap(self):
        assert sdr_db(0.1, 0.0) == SDR_CAP_DB
        assert sdr_db(0.1, 1e-40) == SDR_CAP_DB

    def test_ratio(self):
        assert sdr_db(1.0, 0.01) == pytest.approx(20.0)


class TestBruteforce:
    def test_single_node_is_bayes(self):
        node = BgParams(theta=0.3, mu=0.4, sigma_x2=0.6)
        grid = ParamGrid(
            family=Family.BG,
            theta=np.array([0.3]),
            mu=np.array([0.4]),
            sigma_x2=np.array([0.6]),
            log_prior_weights=np.zeros(1),
        )
        y = np.linspace(-1.5, 1.5, 7)
        np.testing.assert_allclose(
            mixd_bruteforce(y, grid, 0.2), bayes_denoise(y, node, 0.2).estimates, rtol=1e-12
        )

    def test_symmetric_grid_gives_odd_estimates(self):
        grid = ParamGrid(
            family=Family.BG,
            theta=np.array([0.2, 0.2]),
            mu=np.array([-1.0, 1.0]),
            sigma_x2=np.array([0.5, 0.5]),
            log_prior_weights=np.log([0.5, 0.5]),
        )
        y = np.array([-1.2, -0.3, 0.0, 0.3, 1.2])
        estimates = mixd_bruteforce(y, grid, 0.1)
        np.testing.assert_allclose(estimates, -estimates[::-1], atol=1e-12)
