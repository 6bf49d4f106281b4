"""Reference quantities: scalar MMSE, state evolution and brute-force checks."""

from __future__ import annotations

import logging
from enum import Enum
from typing import List, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import quad
from scipy.special import logit

from core import ConvergenceError, SeededStream

from .denoise import posterior_moments
from .model import Model, prior_variance, sample_scalar_channel, sample_signal
from .types import (
    BernoulliParams,
    Family,
    ParamGrid,
    ScalarChannelSpec,
    SeFixedPoint,
    SePoint,
    floor_sigma2,
)

logger = logging.getLogger(__name__)

QUAD_SPAN = 10.0
QUAD_EPSREL = 1e-8
QUAD_EPSABS = 1e-15
QUAD_LIMIT = 200

SE_TOL = 1e-12
SE_MAX_ITERS = 10_000

SDR_CAP_DB = 300.0

MC_BATCH = 1_000_000


class SeDenoiser(str, Enum):
    """Denoisers whose state evolution has a closed-form expectation."""

    BAYES = "bayes"
    IDENTITY = "identity"


def _components(model: Model, sigma2: float) -> List[Tuple[float, float, float]]:
    """(weight, mean, variance) of the two-component marginal of y."""
    if isinstance(model, BernoulliParams):
        slab = (model.theta, 1.0, sigma2)
    else:
        slab = (model.theta, model.mu, model.sigma_x2 + sigma2)
    return [c for c in (slab, (1.0 - model.theta, 0.0, sigma2)) if c[0] > 0.0]


def _decision_points(model: Model, sigma2: float) -> List[float]:
    """Values of y where the posterior inclusion probability crosses 1/2."""
    if not 0.0 < model.theta < 1.0:
        return []
    prior_odds = float(logit(model.theta))
    if isinstance(model, BernoulliParams):
        return [0.5 - sigma2 * prior_odds]
    slab_var = model.sigma_x2 + sigma2
    # log N(y; mu, slab_var) - log N(y; 0, sigma2) + prior_odds = a y^2 + b y + c
    a = 0.5 * (1.0 / sigma2 - 1.0 / slab_var)
    b = model.mu / slab_var
    c = -0.5 * model.mu**2 / slab_var + 0.5 * np.log(sigma2 / slab_var) + prior_odds
    if abs(a) < 1e-300:
        return [-c / b] if b != 0.0 else []
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    root = np.sqrt(disc)
    return sorted({(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)})


def scalar_mmse(model: Model, sigma2: float) -> float:
    """E_y[Var(x|y)] for the scalar channel y = x + N(0, sigma2).

    Integrated per mixture component over +-10 standard deviations of the
    widest component, with the posterior decision boundaries as break points.
    """
    sigma2 = floor_sigma2(sigma2)
    if prior_variance(model) <= 0.0:
        return 0.0
    components = _components(model, sigma2)
    width = QUAD_SPAN * np.sqrt(max(var for _, _, var in components))
    means = [mean for _, mean, _ in components]
    lo, hi = min(means) - width, max(means) + width
    points = [p for p in _decision_points(model, sigma2) + means if lo < p < hi]

    def integrand(y: float, mean: float, var: float) -> float:
        density = np.exp(-0.5 * (y - mean) ** 2 / var) / np.sqrt(2.0 * np.pi * var)
        return float(posterior_moments(y, model, sigma2)[1]) * density

    total = 0.0
    for weight, mean, var in components:
        value, _ = quad(
            integrand,
            lo,
            hi,
            args=(mean, var),
            points=points or None,
            epsrel=QUAD_EPSREL,
            epsabs=QUAD_EPSABS * min(1.0, sigma2),
            limit=QUAD_LIMIT,
        )
        total += weight * value
    return max(total, 0.0)


def scalar_mmse_mc(
    model: Model, sigma2: float, n: int, rng: SeededStream
) -> Tuple[float, float]:
    """Monte Carlo estimate of the scalar MMSE and its standard error.

    Averages the posterior variance over n draws of (x, y), in batches.
    """
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    channel = ScalarChannelSpec(sigma_z2=sigma2)
    total = 0.0
    total_sq = 0.0
    remaining = n
    while remaining > 0:
        size = min(remaining, MC_BATCH)
        x = sample_signal(model, size, rng)
        y = sample_scalar_channel(x, channel, rng)
        _, variance = posterior_moments(y, model, channel.sigma_z2)
        total += float(np.sum(variance))
        total_sq += float(np.sum(variance**2))
        remaining -= size
    mean = total / n
    sample_var = max(total_sq / n - mean**2, 0.0) * n / (n - 1)
    return mean, float(np.sqrt(sample_var / n))


def sdr_db(signal_variance: float, mse: float) -> float:
    """10 log10(signal_variance / mse), capped at +-300 dB."""
    if mse <= 0.0:
        return SDR_CAP_DB
    if signal_variance <= 0.0:
        return -SDR_CAP_DB
    return float(np.clip(10.0 * np.log10(signal_variance / mse), -SDR_CAP_DB, SDR_CAP_DB))


def _denoiser_mse(model: Model, sigma_t2: float, denoiser: Union[SeDenoiser, str]) -> float:
    if SeDenoiser(denoiser) is SeDenoiser.IDENTITY:
        return sigma_t2
    return scalar_mmse(model, sigma_t2)


def se_step(
    model: Model,
    sigma_t2: float,
    delta: float,
    sigma_z2: float,
    denoiser: Union[SeDenoiser, str] = SeDenoiser.BAYES,
) -> float:
    """sigma_{t+1}^2 = sigma_z2 + E[(eta(X + sigma_t W) - X)^2] / delta."""
    if delta <= 0.0:
        raise ValueError(f"measurement rate must be positive, got {delta}")
    sigma_z2 = floor_sigma2(sigma_z2)
    return sigma_z2 + _denoiser_mse(model, floor_sigma2(sigma_t2), denoiser) / delta


def se_start(model: Model, delta: float, sigma_z2: float) -> float:
    """Effective noise of an all-zero first estimate."""
    return floor_sigma2(sigma_z2) + prior_variance(model) / delta


def se_trajectory(
    model: Model,
    delta: float,
    sigma_z2: float,
    iterations: int,
    denoiser: Union[SeDenoiser, str] = SeDenoiser.BAYES,
    sigma0_2: Optional[float] = None,
) -> List[SePoint]:
    """The first ``iterations`` state-evolution points.

    Point t holds the effective noise fed to the denoiser at iteration t and
    the MSE of the estimate it produces.
    """
    sigma_z2 = floor_sigma2(sigma_z2)
    sigma_t2 = se_start(model, delta, sigma_z2) if sigma0_2 is None else floor_sigma2(sigma0_2)
    points: List[SePoint] = []
    for _ in range(iterations):
        mse = _denoiser_mse(model, sigma_t2, denoiser)
        points.append(SePoint(sigma_t2=sigma_t2, mse=mse))
        sigma_t2 = sigma_z2 + mse / delta
    return points


def se_fixed_point(
    model: Model,
    delta: float,
    sigma_z2: float,
    denoiser: Union[SeDenoiser, str] = SeDenoiser.BAYES,
    tol: float = SE_TOL,
    max_iters: int = SE_MAX_ITERS,
    sigma0_2: Optional[float] = None,
) -> SeFixedPoint:
    """Iterate state evolution from an empty estimate until it settles.

    Raises:
        ConvergenceError: the relative change stayed above ``tol`` for
            ``max_iters`` iterations; carries the last iterate.
    """
    sigma_z2 = floor_sigma2(sigma_z2)
    sigma_t2 = se_start(model, delta, sigma_z2) if sigma0_2 is None else floor_sigma2(sigma0_2)
    for iteration in range(1, max_iters + 1):
        updated = se_step(model, sigma_t2, delta, sigma_z2, denoiser)
        if not np.isfinite(updated):
            raise ConvergenceError(
                f"state evolution produced {updated} at iteration {iteration}",
                last_iterate=sigma_t2,
            )
        change = abs(updated - sigma_t2) / sigma_t2
        sigma_t2 = updated
        if change < tol:
            mmse = _denoiser_mse(model, sigma_t2, denoiser)
            logger.debug(
                f"SE fixed point sigma2={sigma_t2:.6g} mmse={mmse:.6g} "
                f"after {iteration} iterations"
            )
            return SeFixedPoint(
                sigma_inf2=sigma_t2,
                mmse=mmse,
                sdr_db=sdr_db(prior_variance(model), mmse),
                iterations=iteration,
            )
    raise ConvergenceError(
        f"state evolution did not converge in {max_iters} iterations", last_iterate=sigma_t2
    )


def mixd_bruteforce(y: ArrayLike, grid: ParamGrid, sigma2: float) -> np.ndarray:
    """Mixture estimate by a direct loop over nodes in extended precision.

    Node likelihoods are accumulated as sums of log-densities and shifted by
    their maximum before exponentiating, so the loop also works where long
    double is no wider than double.
    """
    y = np.asarray(y, dtype=np.longdouble)
    noise = np.longdouble(sigma2)
    two_pi = np.longdouble(2.0) * np.pi
    spike = np.exp(-(y**2) / (2 * noise)) / np.sqrt(two_pi * noise)

    log_post = np.empty(grid.size, dtype=np.longdouble)
    node_means = []
    for g in range(grid.size):
        theta = np.longdouble(grid.theta[g])
        if grid.family is Family.BERNOULLI:
            mean, slab_var, rho = np.longdouble(1.0), noise, np.longdouble(0.0)
        else:
            mean = np.longdouble(grid.mu[g])
            slab_var = np.longdouble(grid.sigma_x2[g]) + noise
            rho = np.longdouble(grid.sigma_x2[g]) / slab_var
        slab = np.exp(-((y - mean) ** 2) / (2 * slab_var)) / np.sqrt(two_pi * slab_var)
        on = theta * slab
        off = (1 - theta) * spike
        log_post[g] = np.longdouble(grid.log_prior_weights[g]) + np.sum(np.log(on + off))
        p = on / (on + off)
        if grid.family is Family.BERNOULLI:
            node_means.append(p)
        else:
            node_means.append(p * (mean + rho * (y - mean)))

    weights = np.exp(log_post - np.max(log_post))
    weights /= np.sum(weights)
    estimate = np.zeros_like(y)
    for g in range(grid.size):
        estimate += weights[g] * node_means[g]
    return estimate.astype(np.float64)
