"""Signal priors, channel sampling and SNR arithmetic."""

from __future__ import annotations

import logging
from typing import Tuple, Union

import numpy as np

from core import DegenerateSignalError, MixdDimensionError, SeededStream

from .types import (
    BernoulliParams,
    BgParams,
    Family,
    MatrixChannelSpec,
    ScalarChannelSpec,
)

logger = logging.getLogger(__name__)

Model = Union[BernoulliParams, BgParams]


def make_model(
    family: Union[Family, str], theta: float, mu: float = 0.0, sigma_x2: float = 1.0
) -> Model:
    """Build a signal model from a family tag and its parameters."""
    family = Family(family)
    if family is Family.BERNOULLI:
        return BernoulliParams(theta=theta)
    return BgParams(theta=theta, mu=mu, sigma_x2=sigma_x2)


def prior_mean(model: Model) -> float:
    if isinstance(model, BernoulliParams):
        return model.theta
    return model.theta * model.mu


def prior_variance(model: Model) -> float:
    """Variance of one signal component under the prior."""
    theta = model.theta
    if isinstance(model, BernoulliParams):
        return theta * (1.0 - theta)
    return theta * model.sigma_x2 + theta * (1.0 - theta) * model.mu**2


def db_to_linear(db: float) -> float:
    return float(10.0 ** (db / 10.0))


def linear_to_db(ratio: float) -> float:
    return float(10.0 * np.log10(ratio))


def sigma_z2_from_snr(model: Model, n: int, m: int, snr_linear: float) -> float:
    """Noise variance that gives the matrix channel the requested SNR.

    SNR is N·Var(x) / (M·Var(z)) for A with N(0, 1/M) entries.
    """
    if not snr_linear > 0:
        raise ValueError(f"SNR must be positive, got {snr_linear}")
    variance = prior_variance(model)
    if variance <= 0.0:
        raise DegenerateSignalError("degenerate signal: prior variance is zero")
    return n * variance / (m * snr_linear)


def sample_signal(model: Model, n: int, rng: SeededStream) -> np.ndarray:
    """Draw n i.i.d. components from the prior."""
    if n < 1:
        raise ValueError("signal dimension must be at least 1")
    gen = rng.generator
    support = gen.random(n) < model.theta
    if isinstance(model, BernoulliParams):
        return support.astype(np.float64)
    slab = model.mu + np.sqrt(model.sigma_x2) * gen.standard_normal(n)
    return np.where(support, slab, 0.0)


def sample_scalar_channel(
    x: np.ndarray, channel: ScalarChannelSpec, rng: SeededStream
) -> np.ndarray:
    """y = x + z with i.i.d. Gaussian noise."""
    x = np.asarray(x, dtype=np.float64)
    z = np.sqrt(channel.sigma_z2) * rng.generator.standard_normal(x.shape[0])
    return x + z


def sample_matrix_channel(
    x: np.ndarray, channel: MatrixChannelSpec, rng: SeededStream
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw A with i.i.d. N(0, 1/M) entries and return (A, A x + z)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (channel.n,):
        raise MixdDimensionError(f"signal has shape {x.shape}, channel expects ({channel.n},)")
    gen = rng.generator
    A = gen.standard_normal((channel.m, channel.n)) / np.sqrt(channel.m)
    z = np.sqrt(channel.sigma_z2) * gen.standard_normal(channel.m)
    logger.debug(f"Sampled {channel.m}x{channel.n} measurement matrix (delta={channel.delta:.3f})")
    return A, A @ x + z
