"""Known-parameter Bayes denoisers for the scalar Gaussian channel.

Posterior inclusion probabilities are computed as a logistic function of the
log-odds, so observations far in the tails saturate at 0 or 1 instead of
overflowing. The posterior variance is returned alongside the mean because the
derivative of a conditional-mean denoiser under Gaussian noise is
``Var(x|y) / sigma2``.
"""

from __future__ import annotations

from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import expit, logit

from .model import Model
from .types import BernoulliParams, BgParams, DenoiserOutput, ScalarPosterior

LOG_2PI = float(np.log(2.0 * np.pi))


def log_normal_pdf(y: ArrayLike, mean: ArrayLike, var: ArrayLike) -> np.ndarray:
    """Elementwise log N(y; mean, var)."""
    y = np.asarray(y, dtype=np.float64)
    return -0.5 * (LOG_2PI + np.log(var) + (y - mean) ** 2 / var)


def _log_odds_prior(theta: ArrayLike) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.asarray(logit(theta), dtype=np.float64)


def bernoulli_moments(
    y: ArrayLike, theta: ArrayLike, sigma2: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of a Bernoulli(theta) component; broadcasts."""
    y = np.asarray(y, dtype=np.float64)
    # log N(y-1) - log N(y) = (2y - 1) / (2 sigma2)
    log_odds = _log_odds_prior(theta) + (2.0 * y - 1.0) / (2.0 * sigma2)
    p = expit(log_odds)
    return p, p * (1.0 - p)


def bg_moments(
    y: ArrayLike, theta: ArrayLike, mu: ArrayLike, sigma_x2: ArrayLike, sigma2: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of a spike-and-slab component; broadcasts."""
    y = np.asarray(y, dtype=np.float64)
    slab_var = sigma_x2 + sigma2
    rho = sigma_x2 / slab_var
    m1 = mu + rho * (y - mu)
    v1 = rho * sigma2
    log_odds = (
        _log_odds_prior(theta)
        + log_normal_pdf(y, mu, slab_var)
        - log_normal_pdf(y, 0.0, sigma2)
    )
    p = expit(log_odds)
    mean = p * m1
    variance = p * v1 + p * (1.0 - p) * m1**2
    return mean, variance


def posterior_moments(
    y: ArrayLike, model: Model, sigma2: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of every entry of y under a known prior."""
    if isinstance(model, BernoulliParams):
        return bernoulli_moments(y, model.theta, sigma2)
    return bg_moments(y, model.theta, model.mu, model.sigma_x2, sigma2)


def bernoulli_posterior(y: float, theta: float, sigma2: float) -> ScalarPosterior:
    """E[x|y] and Var[x|y] for x ~ Bernoulli(theta), y = x + N(0, sigma2)."""
    mean, variance = bernoulli_moments(y, theta, sigma2)
    return ScalarPosterior(mean=float(mean), variance=float(variance))


def bg_posterior(y: float, params: BgParams, sigma2: float) -> ScalarPosterior:
    """E[x|y] and Var[x|y] for a spike-and-slab x observed in Gaussian noise."""
    mean, variance = bg_moments(y, params.theta, params.mu, params.sigma_x2, sigma2)
    return ScalarPosterior(mean=float(mean), variance=float(variance))


def bayes_denoise(
    y: ArrayLike, model: Union[BernoulliParams, BgParams], sigma2: float
) -> DenoiserOutput:
    """Component-wise posterior means and the average derivative <eta'>."""
    y = np.asarray(y, dtype=np.float64)
    mean, variance = posterior_moments(y, model, sigma2)
    derivative = float(np.mean(variance)) / sigma2 if y.size else 0.0
    return DenoiserOutput(estimates=mean, mean_derivative=derivative)
