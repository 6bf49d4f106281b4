"""Approximate message passing for y = A x + z with a pluggable scalar denoiser.

Each iteration forms the pseudo-data A^T r + x, which behaves like the signal
observed in Gaussian noise of variance mean(r**2), denoises it, and updates the
residual with the Onsager correction computed in the same denoising pass.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Union

import numpy as np

from core import DivergenceError, MixdDimensionError, NonFiniteError

from .denoise import bayes_denoise
from .fit import plugin_denoise
from .mixd import DEFAULT_AMP_BG_K, DEFAULT_BERNOULLI_K, build_grid, mixd_denoise
from .model import Model
from .types import (
    SIGMA2_FLOOR,
    AmpConfig,
    AmpIteration,
    AmpResult,
    AmpState,
    DenoiserKind,
    DenoiserOutput,
    Family,
    MatrixChannelSpec,
)

logger = logging.getLogger(__name__)

# Convergence threshold on ||x^{t+1} - x^t||^2 while x^t is still zero.
ABS_CHANGE_FLOOR = 1e-14


def pseudo_data(state: AmpState, A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """A^T r_t + x_t."""
    m, n = A.shape
    if state.x_t.shape != (n,) or state.r_t.shape != (m,) or y.shape != (m,):
        raise MixdDimensionError(
            f"A is {m}x{n} but x_t has shape {state.x_t.shape}, r_t {state.r_t.shape}, "
            f"y {y.shape}"
        )
    return A.T @ state.r_t + state.x_t


def estimate_noise(r: np.ndarray) -> float:
    """Effective noise variance estimate (1/M) sum r_i^2."""
    r = np.asarray(r, dtype=np.float64)
    if r.size < 1:
        raise ValueError("residual must have at least one entry")
    return float(np.mean(r**2))


def denoise(s: np.ndarray, sigma2: float, config: AmpConfig, state: AmpState) -> DenoiserOutput:
    """Apply the configured denoiser to pseudo-data s at noise level sigma2."""
    if config.denoiser is DenoiserKind.BAYES:
        assert config.known_params is not None
        return bayes_denoise(s, config.known_params, sigma2)
    if config.denoiser is DenoiserKind.PLUGIN:
        assert config.plugin_family is not None
        init = state.params if config.warm_start else None
        return plugin_denoise(s, config.plugin_family, sigma2, init=init)
    assert config.grid is not None
    return mixd_denoise(s, config.grid, sigma2)


def amp_step(state: AmpState, A: np.ndarray, y: np.ndarray, config: AmpConfig) -> AmpState:
    """One AMP iteration.

    Raises:
        NonFiniteError: the new estimate or residual contains NaN or inf.
    """
    m, n = A.shape
    s = pseudo_data(state, A, y)
    sigma2 = max(state.sigma_hat2, SIGMA2_FLOOR)
    output = denoise(s, sigma2, config, state)
    x_next = output.estimates
    r_next = y - A @ x_next
    if config.onsager:
        r_next = r_next + (n / m) * output.mean_derivative * state.r_t

    t = state.t + 1
    if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(r_next))):
        raise NonFiniteError(f"non-finite values in AMP iterate {t}", iteration=t)
    return AmpState(
        x_t=x_next,
        r_t=r_next,
        sigma_hat2=estimate_noise(r_next),
        t=t,
        mean_derivative=output.mean_derivative,
        params=output.params if output.params is not None else state.params,
    )


def _relative_change(previous: np.ndarray, current: np.ndarray) -> float:
    change = float(np.sum((current - previous) ** 2))
    norm = float(np.sum(previous**2))
    return change / norm if norm > 0.0 else change


def amp_run(
    A: np.ndarray,
    y: np.ndarray,
    channel: MatrixChannelSpec,
    config: AmpConfig,
    x_true: Optional[np.ndarray] = None,
) -> AmpResult:
    """Run AMP from x = 0, r = y until the estimate stops moving.

    Args:
        A: Measurement matrix of shape (m, n).
        y: Measurements of length m.
        channel: Channel dimensions.
        config: Denoiser and stopping rules.
        x_true: Signal, when known, to record the per-iteration MSE.

    Returns:
        AmpResult with the final estimate and per-iteration history.

    Raises:
        DivergenceError: the noise estimate grew past ``divergence_factor``
            times its initial value; carries the history so far.
    """
    A = np.asarray(A, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if A.shape != (channel.m, channel.n):
        raise MixdDimensionError(
            f"A has shape {A.shape}, channel expects ({channel.m}, {channel.n})"
        )
    if x_true is not None and np.shape(x_true) != (channel.n,):
        raise MixdDimensionError(f"x_true has shape {np.shape(x_true)}, expected ({channel.n},)")

    state = AmpState(x_t=np.zeros(channel.n), r_t=y.copy(), sigma_hat2=estimate_noise(y))
    limit = config.divergence_factor * max(state.sigma_hat2, SIGMA2_FLOOR)
    history: List[AmpIteration] = []
    converged = False
    for _ in range(config.max_iters):
        nxt = amp_step(state, A, y, config)
        mse = float(np.mean((nxt.x_t - x_true) ** 2)) if x_true is not None else None
        history.append(
            AmpIteration(
                t=nxt.t,
                sigma_hat2=state.sigma_hat2,
                mean_derivative=nxt.mean_derivative,
                mse=mse,
            )
        )
        logger.debug(
            f"AMP iteration {nxt.t}: sigma_hat2={state.sigma_hat2:.6g} "
            f"<eta'>={nxt.mean_derivative:.6g}" + (f" mse={mse:.6g}" if mse is not None else "")
        )
        if nxt.sigma_hat2 > limit:
            logger.warning(
                f"AMP diverged at iteration {nxt.t}: sigma_hat2={nxt.sigma_hat2:.6g} "
                f"exceeds {limit:.6g}"
            )
            raise DivergenceError(f"AMP diverged at iteration {nxt.t}", history=history)

        threshold = config.tol if np.any(state.x_t) else ABS_CHANGE_FLOOR
        done = _relative_change(state.x_t, nxt.x_t) < threshold
        state = nxt
        if done:
            converged = True
            break

    if converged:
        logger.info(f"AMP converged after {state.t} iterations")
    else:
        logger.info(f"AMP stopped at the iteration limit ({config.max_iters})")
    return AmpResult(x_hat=state.x_t, history=history, iterations=state.t, converged=converged)


def make_amp_config(
    denoiser: Union[DenoiserKind, str],
    family: Optional[Union[Family, str]] = None,
    known_params: Optional[Model] = None,
    grid_theta: Optional[int] = None,
    grid_mu: Optional[int] = None,
    grid_sigma: Optional[int] = None,
    **options: Union[int, float, bool],
) -> AmpConfig:
    """AmpConfig with a default-sized MixD grid for the family when needed.

    Remaining keyword arguments (``max_iters``, ``tol``, ``warm_start``,
    ``onsager``, ``divergence_factor``) are passed through.
    """
    kind = DenoiserKind(denoiser)
    if family is None and known_params is not None:
        family = known_params.family
    grid = None
    if kind is DenoiserKind.MIXD:
        if family is None:
            raise ValueError("the mixd denoiser needs a signal family")
        fam = Family(family)
        default_k = DEFAULT_BERNOULLI_K if fam is Family.BERNOULLI else DEFAULT_AMP_BG_K
        grid = build_grid(
            fam,
            grid_theta or default_k,
            grid_mu or DEFAULT_AMP_BG_K,
            grid_sigma or DEFAULT_AMP_BG_K,
        )
    return AmpConfig(
        denoiser=kind,
        grid=grid,
        known_params=known_params,
        family=Family(family) if family is not None else None,
        **options,
    )
