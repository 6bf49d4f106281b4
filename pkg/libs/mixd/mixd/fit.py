"""Maximum-likelihood prior fitting and the Plug-in (empirical Bayes) denoiser.

The noise variance is treated as known; EM runs over the two-component
marginal of y and stops on a parameter-change threshold. Each E-step's
log-sum-exp also yields the log-likelihood of the current iterate, which is
used to check that EM never loses likelihood.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike

from .denoise import bayes_denoise, log_normal_pdf
from .types import BernoulliParams, BgParams, DenoiserOutput, Family, FitResult

logger = logging.getLogger(__name__)

EM_TOL = 1e-10
EM_MAX_ITERS = 500
SLAB_VAR_EPS = 1e-12
BG_STARTS: Tuple[float, ...] = (0.1, 0.5, 0.9)
# Log-likelihood gain per extra slab parameter, in units of log N, that a BG fit
# must show over the noise-only model.
NULL_PENALTY = 0.5
BG_FREE_PARAMS = 3
# EM can only lose likelihood to rounding.
ASCENT_SLACK = 1e-9


def _log(values: ArrayLike) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def _mixture_terms(
    y: np.ndarray, theta: float, slab: np.ndarray, spike: np.ndarray
) -> Tuple[float, np.ndarray]:
    """Log-likelihood and slab responsibilities for given component log-densities."""
    a = _log(theta) + slab
    b = _log(1.0 - theta) + spike
    total = np.logaddexp(a, b)
    gamma = np.exp(a - total)
    return float(np.sum(total)), gamma


def bernoulli_log_likelihood(y: ArrayLike, theta: float, sigma2: float) -> float:
    """sum_i log[theta N(y_i; 1, sigma2) + (1 - theta) N(y_i; 0, sigma2)]."""
    y = np.asarray(y, dtype=np.float64)
    ll, _ = _mixture_terms(
        y, theta, log_normal_pdf(y, 1.0, sigma2), log_normal_pdf(y, 0.0, sigma2)
    )
    return ll


def bg_log_likelihood(y: ArrayLike, params: BgParams, sigma2: float) -> float:
    """sum_i log[theta N(y_i; mu, sigma_x2 + sigma2) + (1 - theta) N(y_i; 0, sigma2)]."""
    y = np.asarray(y, dtype=np.float64)
    ll, _ = _mixture_terms(
        y,
        params.theta,
        log_normal_pdf(y, params.mu, params.sigma_x2 + sigma2),
        log_normal_pdf(y, 0.0, sigma2),
    )
    return ll


def _check_ascent(previous: float, current: float, iteration: int) -> None:
    if current < previous - ASCENT_SLACK * max(1.0, abs(previous)):
        logger.warning(
            f"EM log-likelihood decreased at iteration {iteration}: "
            f"{previous:.12g} -> {current:.12g}"
        )


def fit_bernoulli_ml(
    y: ArrayLike, sigma2: float, init: Optional[float] = None
) -> FitResult:
    """ML estimate of theta for Bernoulli signals by EM.

    Args:
        y: Noisy observations, at least one.
        sigma2: Known noise variance.
        init: Starting theta (default 0.5).

    Returns:
        FitResult; boundary optima theta in {0, 1} are returned as-is.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size < 1:
        raise ValueError("fit_bernoulli_ml needs at least one observation")

    one = log_normal_pdf(y, 1.0, sigma2)
    zero = log_normal_pdf(y, 0.0, sigma2)
    theta = 0.5 if init is None else float(init)
    previous_ll = -np.inf
    converged = False
    iterations = 0
    for iterations in range(1, EM_MAX_ITERS + 1):
        ll, gamma = _mixture_terms(y, theta, one, zero)
        _check_ascent(previous_ll, ll, iterations)
        previous_ll = ll
        new_theta = min(max(float(np.mean(gamma)), 0.0), 1.0)
        step = abs(new_theta - theta)
        theta = new_theta
        if step < EM_TOL:
            converged = True
            break

    ll, _ = _mixture_terms(y, theta, one, zero)
    logger.debug(f"Bernoulli EM: theta={theta:.6g} after {iterations} iterations")
    return FitResult(
        params=BernoulliParams(theta=theta),
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
    )


def moment_matched_start(y: np.ndarray, sigma2: float, theta0: float) -> BgParams:
    """Slab mean and variance that match the first two moments of y for a given theta."""
    mu0 = float(np.mean(y)) / theta0
    second = float(np.mean(y**2))
    sigma_x2 = max(SLAB_VAR_EPS, (second - sigma2) / theta0 - mu0**2)
    return BgParams(theta=theta0, mu=mu0, sigma_x2=sigma_x2)


def _bg_em(y: np.ndarray, sigma2: float, start: BgParams) -> FitResult:
    theta, mu, sigma_x2 = start.theta, start.mu, start.sigma_x2
    spike = log_normal_pdf(y, 0.0, sigma2)
    previous_ll = -np.inf
    converged = False
    iterations = 0
    for iterations in range(1, EM_MAX_ITERS + 1):
        ll, gamma = _mixture_terms(y, theta, log_normal_pdf(y, mu, sigma_x2 + sigma2), spike)
        _check_ascent(previous_ll, ll, iterations)
        previous_ll = ll
        weight = float(np.sum(gamma))
        if weight <= 0.0:
            # Every observation went to the spike; the slab stays where it is.
            theta = 0.0
            converged = True
            break
        new_theta = min(weight / y.size, 1.0)
        new_mu = float(np.sum(gamma * y)) / weight
        new_sigma_x2 = max(
            SLAB_VAR_EPS, float(np.sum(gamma * (y - new_mu) ** 2)) / weight - sigma2
        )
        step = max(abs(new_theta - theta), abs(new_mu - mu), abs(new_sigma_x2 - sigma_x2))
        theta, mu, sigma_x2 = new_theta, new_mu, new_sigma_x2
        if step < EM_TOL:
            converged = True
            break

    params = BgParams(theta=theta, mu=mu, sigma_x2=sigma_x2)
    return FitResult(
        params=params,
        log_likelihood=bg_log_likelihood(y, params, sigma2),
        iterations=iterations,
        converged=converged,
    )


def fit_bg_ml(
    y: ArrayLike,
    sigma2: float,
    init: Optional[BgParams] = None,
    starts: Sequence[float] = BG_STARTS,
) -> FitResult:
    """ML estimate of (theta, mu, sigma_x2) for spike-and-slab signals.

    EM is restarted from each theta in ``starts`` with moment-matched slab
    parameters and the best final log-likelihood wins (ties go to the earlier
    start). Passing ``init`` runs a single EM from that point instead.

    On data the noise-only model explains, the slab is not identifiable and EM
    drifts along a ridge of near-equal likelihood. A fit whose gain over theta = 0
    is at most ``NULL_PENALTY * log N`` per slab parameter is therefore reported as
    theta = 0.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size < 2:
        raise ValueError("fit_bg_ml needs at least two observations")

    if not np.any(y):
        start = moment_matched_start(y, sigma2, starts[0])
        params = BgParams(theta=0.0, mu=start.mu, sigma_x2=start.sigma_x2)
        return FitResult(
            params=params,
            log_likelihood=bg_log_likelihood(y, params, sigma2),
            iterations=0,
            converged=True,
        )

    initial = [init] if init is not None else [moment_matched_start(y, sigma2, t) for t in starts]
    best: Optional[FitResult] = None
    for start in initial:
        result = _bg_em(y, sigma2, start)
        logger.debug(
            f"BG EM from theta0={start.theta:.2f}: theta={result.params.theta:.6g} "
            f"ll={result.log_likelihood:.6f} ({result.iterations} iterations)"
        )
        if best is None or result.log_likelihood > best.log_likelihood:
            best = result
    assert best is not None

    null_ll = float(np.sum(log_normal_pdf(y, 0.0, sigma2)))
    gain = best.log_likelihood - null_ll
    if gain <= BG_FREE_PARAMS * NULL_PENALTY * np.log(y.size):
        logger.debug(
            f"BG fit at theta={best.params.theta:.4g} gains only {gain:.4g} nats "
            "over the noise-only model; using theta=0"
        )
        params = best.params.model_copy(update={"theta": 0.0})
        return FitResult(
            params=params,
            log_likelihood=null_ll,
            iterations=best.iterations,
            converged=best.converged,
        )
    return best


def fit_ml(
    y: ArrayLike,
    family: Union[Family, str],
    sigma2: float,
    init: Optional[Union[BernoulliParams, BgParams]] = None,
) -> FitResult:
    """Dispatch to the ML fit of the given family."""
    family = Family(family)
    if family is Family.BERNOULLI:
        start = init.theta if isinstance(init, BernoulliParams) else None
        return fit_bernoulli_ml(y, sigma2, init=start)
    return fit_bg_ml(y, sigma2, init=init if isinstance(init, BgParams) else None)


def grid_search_bernoulli_ml(
    y: ArrayLike, sigma2: float, resolution: float = 1e-4
) -> Tuple[float, float]:
    """Brute-force ML over theta on a regular grid; returns (theta, log-likelihood)."""
    y = np.asarray(y, dtype=np.float64)
    thetas = np.linspace(0.0, 1.0, int(round(1.0 / resolution)) + 1)
    one = log_normal_pdf(y, 1.0, sigma2)
    zero = log_normal_pdf(y, 0.0, sigma2)
    lls = np.empty_like(thetas)
    chunk = 256
    for lo in range(0, thetas.size, chunk):
        t = thetas[lo : lo + chunk, None]
        lls[lo : lo + chunk] = np.sum(np.logaddexp(_log(t) + one, _log(1.0 - t) + zero), axis=1)
    best = int(np.argmax(lls))
    return float(thetas[best]), float(lls[best])


def plugin_denoise(
    y: ArrayLike,
    model_family: Union[Family, str],
    sigma2: float,
    init: Optional[Union[BernoulliParams, BgParams]] = None,
) -> DenoiserOutput:
    """Empirical Bayes: fit the prior by ML, then apply the Bayes denoiser at the fit."""
    fit = fit_ml(y, model_family, sigma2, init=init)
    output = bayes_denoise(y, fit.params, sigma2)
    return DenoiserOutput(
        estimates=output.estimates, mean_derivative=output.mean_derivative, params=fit.params
    )
