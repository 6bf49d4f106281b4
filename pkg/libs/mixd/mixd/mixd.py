"""Full-Bayes mixture denoiser over a quadrature grid of prior parameters.

The unknown prior parameters get a noninformative hyperprior: Jeffreys for
theta, uniform for mu and uniform for the slab standard deviation. Each axis
is discretized with the midpoint rule. The theta axis is parametrized as
theta = sin^2(u), which turns Jeffreys' density into a constant in u, so
every theta node carries the same weight and the endpoint singularities need
no special handling.

The estimate is a posterior-weighted average of Bayes estimates at the grid
nodes. Its average derivative treats the weights as constant in y; each
observation moves the weights by O(1/N), so the neglected term vanishes for
large N. ``mixd_divergence_mc`` measures the full derivative for comparison.
"""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import logsumexp

from core import SeededStream

from .denoise import bernoulli_moments, bg_moments, log_normal_pdf
from .fit import bernoulli_log_likelihood, bg_log_likelihood
from .model import Model
from .types import (
    BernoulliParams,
    DenoiserOutput,
    Family,
    ParamGrid,
    ParamPosterior,
)

logger = logging.getLogger(__name__)

DEFAULT_BERNOULLI_K = 201
DEFAULT_BG_K = 33
DEFAULT_AMP_BG_K = 17

MU_RANGE = (-2.0, 2.0)
SIGMA_X_MAX = 2.0

# Nodes below this posterior weight are left out of the mixture.
PRUNE_WEIGHT = 1e-18
# Upper bound on the number of (node, component) entries held at once.
CHUNK_ELEMENTS = 1 << 22


def _midpoints(k: int, lo: float, hi: float) -> np.ndarray:
    if k < 1:
        raise ValueError(f"grid axis needs at least one node, got {k}")
    return lo + (np.arange(k, dtype=np.float64) + 0.5) * (hi - lo) / k


def _theta_axis(k: int) -> np.ndarray:
    return np.sin(_midpoints(k, 0.0, np.pi / 2.0)) ** 2


def build_bernoulli_grid(k: int = DEFAULT_BERNOULLI_K) -> ParamGrid:
    """Jeffreys-weighted grid of k theta nodes."""
    theta = _theta_axis(k)
    return ParamGrid(
        family=Family.BERNOULLI,
        theta=theta,
        mu=np.zeros(k),
        sigma_x2=np.zeros(k),
        log_prior_weights=np.full(k, -np.log(k)),
    )


def build_bg_grid(
    k_theta: int = DEFAULT_BG_K, k_mu: int = DEFAULT_BG_K, k_sigma: int = DEFAULT_BG_K
) -> ParamGrid:
    """Product grid over (theta, mu, sigma_x), theta varying slowest.

    mu takes midpoints of [-2, 2] and sigma_x midpoints of (0, 2]; nodes store
    sigma_x2 = sigma_x**2 so the spacing is uniform in the standard deviation.
    """
    theta_axis = _theta_axis(k_theta)
    mu_axis = _midpoints(k_mu, *MU_RANGE)
    sigma_axis = _midpoints(k_sigma, 0.0, SIGMA_X_MAX)
    theta, mu, sigma_x = np.meshgrid(theta_axis, mu_axis, sigma_axis, indexing="ij")
    size = theta.size
    return ParamGrid(
        family=Family.BG,
        theta=theta.ravel(),
        mu=mu.ravel(),
        sigma_x2=(sigma_x * sigma_x).ravel(),
        log_prior_weights=np.full(size, -np.log(size)),
    )


def build_grid(family: Family, k_theta: int, k_mu: int = 1, k_sigma: int = 1) -> ParamGrid:
    """Grid for a family; the mu and sigma counts are ignored for Bernoulli."""
    if Family(family) is Family.BERNOULLI:
        return build_bernoulli_grid(k_theta)
    return build_bg_grid(k_theta, k_mu, k_sigma)


def log_marginal_likelihood(y: ArrayLike, node: Model, sigma2: float) -> float:
    """log f(y | node) for i.i.d. components; 0 for an empty y."""
    if isinstance(node, BernoulliParams):
        return bernoulli_log_likelihood(y, node.theta, sigma2)
    return bg_log_likelihood(y, node, sigma2)


def _slab_table(y: np.ndarray, grid: ParamGrid, sigma2: float) -> Tuple[np.ndarray, np.ndarray]:
    """Slab log-densities per distinct slab and the slab index of every node."""
    if grid.family is Family.BERNOULLI:
        return log_normal_pdf(y, 1.0, sigma2)[None, :], np.zeros(grid.size, dtype=np.intp)
    pairs = np.stack([grid.mu, grid.sigma_x2], axis=1)
    unique, inverse = np.unique(pairs, axis=0, return_inverse=True)
    table = log_normal_pdf(y[None, :], unique[:, :1], unique[:, 1:] + sigma2)
    return table, inverse.reshape(-1)


def grid_log_likelihoods(y: ArrayLike, grid: ParamGrid, sigma2: float) -> np.ndarray:
    """log f(y | node) for every grid node.

    The spike density is shared by all nodes and each slab density by all
    nodes with the same (mu, sigma_x2), so only theta varies per node.
    """
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros(grid.size)
    if y.size == 0:
        return out
    spike = log_normal_pdf(y, 0.0, sigma2)
    table, inverse = _slab_table(y, grid, sigma2)
    with np.errstate(divide="ignore"):
        log_theta = np.log(grid.theta)
        log_rest = np.log1p(-grid.theta)
    step = max(1, CHUNK_ELEMENTS // y.size)
    for lo in range(0, grid.size, step):
        hi = min(lo + step, grid.size)
        slab = log_theta[lo:hi, None] + table[inverse[lo:hi]]
        out[lo:hi] = np.sum(np.logaddexp(slab, log_rest[lo:hi, None] + spike), axis=1)
    return out


def param_posterior(y: ArrayLike, grid: ParamGrid, sigma2: float) -> ParamPosterior:
    """Normalized posterior over grid nodes: prior weight times marginal likelihood."""
    unnormalized = grid.log_prior_weights + grid_log_likelihoods(y, grid, sigma2)
    return ParamPosterior(log_weights=unnormalized - logsumexp(unnormalized))


def _component_moments(
    y: np.ndarray, grid: ParamGrid, index: np.ndarray, sigma2: float
) -> Tuple[np.ndarray, np.ndarray]:
    theta = grid.theta[index, None]
    if grid.family is Family.BERNOULLI:
        return bernoulli_moments(y[None, :], theta, sigma2)
    return bg_moments(
        y[None, :], theta, grid.mu[index, None], grid.sigma_x2[index, None], sigma2
    )


def mixd_denoise(
    y: ArrayLike,
    grid: ParamGrid,
    sigma2: float,
    posterior: Optional[ParamPosterior] = None,
) -> DenoiserOutput:
    """Posterior-weighted mixture of Bayes estimates and its frozen-weights derivative.

    Args:
        y: Observations of the scalar channel.
        grid: Parameter grid with prior weights.
        sigma2: Noise variance.
        posterior: Weights to use instead of the posterior computed from y.

    Returns:
        DenoiserOutput with the mixture estimates.
    """
    y = np.asarray(y, dtype=np.float64)
    if posterior is None:
        posterior = param_posterior(y, grid, sigma2)
    weights = posterior.weights
    keep = np.flatnonzero(weights >= PRUNE_WEIGHT)
    if keep.size == 0:
        keep = np.array([int(np.argmax(weights))])
    kept = weights[keep] / np.sum(weights[keep])
    logger.debug(f"MixD: {keep.size} of {grid.size} nodes above the pruning threshold")

    estimates = np.zeros_like(y)
    variance = np.zeros_like(y)
    if y.size:
        step = max(1, CHUNK_ELEMENTS // y.size)
        for lo in range(0, keep.size, step):
            index = keep[lo : lo + step]
            w = kept[lo : lo + step, None]
            mean, var = _component_moments(y, grid, index, sigma2)
            estimates += np.sum(w * mean, axis=0)
            variance += np.sum(w * var, axis=0)
    derivative = float(np.mean(variance)) / sigma2 if y.size else 0.0
    return DenoiserOutput(estimates=estimates, mean_derivative=derivative)


def mixd_divergence_mc(
    y: ArrayLike,
    grid: ParamGrid,
    sigma2: float,
    rng: SeededStream,
    eps: Optional[float] = None,
) -> float:
    """Monte Carlo estimate of the average derivative, weights included.

    The whole vector is perturbed along a Gaussian direction b and the divergence
    is read off as b^T (eta(y + eps b) - eta(y)) / (eps N).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        return 0.0
    if eps is None:
        eps = max(float(np.max(np.abs(y))), 1.0) / 1000.0
    direction = rng.generator.standard_normal(y.size)
    base = mixd_denoise(y, grid, sigma2).estimates
    jittered = mixd_denoise(y + eps * direction, grid, sigma2).estimates
    return float(np.dot(direction, jittered - base) / (eps * y.size))
