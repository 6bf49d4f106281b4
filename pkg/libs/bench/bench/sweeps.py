"""Monte Carlo experiments behind the CLI subcommands.

Trial k of sweep point p always draws from
``SeededStream(master_seed=seed, stream_index=p).spawn(k)``, and results are
reduced in (point, trial) order, so the output depends only on the
configuration and never on the worker count.
"""

from __future__ import annotations

import logging
import time
from typing import Dict, List, Optional, Tuple, Type

import numpy as np
from pydantic import BaseModel, ConfigDict

from core import ConvergenceError, DivergenceError, NonFiniteError, SeededStream
from mixd import (
    DenoiserKind,
    Family,
    MatrixChannelSpec,
    ParamGrid,
    ScalarChannelSpec,
    amp_run,
    bayes_denoise,
    build_grid,
    db_to_linear,
    make_amp_config,
    mixd_denoise,
    plugin_denoise,
    prior_variance,
    sample_matrix_channel,
    sample_scalar_channel,
    sample_signal,
    scalar_mmse,
    sdr_db,
    se_fixed_point,
    sigma_z2_from_snr,
)
from mixd.oracle import SDR_CAP_DB
from mixd.types import floor_sigma2

from .config import Experiment, SweepConfig
from .records import AmpRow, Row, ScalarRow, TrialBatch, TrialRecord
from .runner import SweepRunner

logger = logging.getLogger(__name__)

# Scalar trials handed to a worker at once.
SCALAR_BATCH = 1000


class ScalarTask(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: SweepConfig
    point: int
    n: int
    first_trial: int
    count: int


class AmpPoint(BaseModel):
    """One (SNR, M) point of a matrix-channel sweep."""

    model_config = ConfigDict(frozen=True)

    index: int
    n: int
    m: int
    sigma_z2: float
    snr_db: float


class AmpTask(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: SweepConfig
    point: AmpPoint
    trial: int


def trial_stream(seed: int, point: int, trial: int) -> SeededStream:
    return SeededStream(master_seed=seed, stream_index=point).spawn(trial)


def _scalar_grid(config: SweepConfig) -> Optional[ParamGrid]:
    if DenoiserKind.MIXD not in config.denoisers:
        return None
    return build_grid(config.model, *config.grid_sizes)


def scalar_estimate(
    kind: DenoiserKind,
    y: np.ndarray,
    config: SweepConfig,
    sigma2: float,
    grid: Optional[ParamGrid] = None,
) -> np.ndarray:
    """Estimate x from y = x + z with one of the scalar denoisers."""
    if kind is DenoiserKind.BAYES:
        return bayes_denoise(y, config.signal_model, sigma2).estimates
    if kind is DenoiserKind.PLUGIN:
        return plugin_denoise(y, config.model, sigma2).estimates
    if grid is None:
        grid = build_grid(config.model, *config.grid_sizes)
    return mixd_denoise(y, grid, sigma2).estimates


def run_scalar_batch(task: ScalarTask) -> TrialBatch:
    """Run ``task.count`` consecutive scalar trials at one N."""
    started = time.perf_counter()
    config = task.config
    model = config.signal_model
    channel = ScalarChannelSpec(sigma_z2=config.scalar_sigma_z2)
    grid = _scalar_grid(config)
    mse = {kind.value: np.empty(task.count) for kind in config.denoisers}
    for k in range(task.count):
        rng = trial_stream(config.seed, task.point, task.first_trial + k)
        x = sample_signal(model, task.n, rng)
        y = sample_scalar_channel(x, channel, rng)
        for kind in config.denoisers:
            estimate = scalar_estimate(kind, y, config, channel.sigma_z2, grid)
            mse[kind.value][k] = np.mean((estimate - x) ** 2)
    return TrialBatch(
        point=task.point,
        first_trial=task.first_trial,
        mse=mse,
        wall_time=time.perf_counter() - started,
    )


def run_scalar_sweep(config: SweepConfig, runner: Optional[SweepRunner] = None) -> List[ScalarRow]:
    """Per-N mean MSE of each method against the scalar MMSE.

    Returns:
        One row per (N, method), ordered by N and then by method as configured.
    """
    runner = runner or SweepRunner(config.workers)
    trials = config.trials or 1
    channel = ScalarChannelSpec(sigma_z2=config.scalar_sigma_z2)
    methods = ", ".join(kind.value for kind in config.denoisers)
    logger.info(
        f"Scalar sweep: {config.model.value} prior, {len(config.n_list)} values of N, "
        f"{trials} trials, methods {methods}"
    )
    mmse = scalar_mmse(config.signal_model, channel.sigma_z2)
    logger.info(f"Scalar MMSE at sigma_z2={channel.sigma_z2:.6g}: {mmse:.6g}")

    tasks = [
        ScalarTask(
            config=config,
            point=point,
            n=n,
            first_trial=first,
            count=min(SCALAR_BATCH, trials - first),
        )
        for point, n in enumerate(config.n_list)
        for first in range(0, trials, SCALAR_BATCH)
    ]
    batches = runner.map(run_scalar_batch, tasks, "scalar sweep")

    rows: List[ScalarRow] = []
    for point, n in enumerate(config.n_list):
        mine = [b for b in batches if b.point == point]
        for kind in config.denoisers:
            values = np.concatenate([b.mse[kind.value] for b in mine])
            mean = float(np.mean(values))
            stderr = None
            if values.size > 1:
                stderr = float(np.std(values, ddof=1) / np.sqrt(values.size))
            rows.append(
                ScalarRow(
                    model=config.model.value,
                    n=n,
                    trials=trials,
                    seed=config.seed,
                    method=kind.value,
                    mse=mean,
                    mmse=mmse,
                    excess_mse=mean - mmse,
                    stderr=stderr,
                )
            )
        logger.debug(
            f"N={n}: "
            + ", ".join(f"{r.method} excess {r.excess_mse:.4g}" for r in rows if r.n == n)
        )
    return rows


def run_denoise_once(config: SweepConfig, runner: Optional[SweepRunner] = None) -> List[ScalarRow]:
    """Scalar trials at the single size ``config.n``, one row per method."""
    assert config.n is not None
    rows = run_scalar_sweep(config.model_copy(update={"n_list": [config.n]}), runner)
    for row in rows:
        logger.info(f"{row.method}: MSE {row.mse:.6g} (MMSE {row.mmse:.6g})")
    return rows


def _channel_snr_db(config: SweepConfig, n: int, m: int, sigma_z2: float) -> float:
    """SNR of the matrix channel implied by a fixed noise variance, capped like SDR."""
    signal = n * prior_variance(config.signal_model)
    noise = m * sigma_z2
    if noise <= 0.0:
        return SDR_CAP_DB
    if signal <= 0.0:
        return -SDR_CAP_DB
    return float(np.clip(10.0 * np.log10(signal / noise), -SDR_CAP_DB, SDR_CAP_DB))


def amp_points(config: SweepConfig) -> List[AmpPoint]:
    """Sweep points ordered by SNR and then by M."""
    assert config.n is not None
    n = config.n
    points: List[AmpPoint] = []
    snrs: List[Optional[float]] = list(config.snr_db) or [None]
    for snr in snrs:
        for m in config.m_list:
            if snr is None:
                assert config.sigma_z2 is not None
                sigma_z2 = floor_sigma2(config.sigma_z2)
                point_snr = _channel_snr_db(config, n, m, sigma_z2)
            else:
                sigma_z2 = sigma_z2_from_snr(config.signal_model, n, m, db_to_linear(snr))
                point_snr = snr
            points.append(
                AmpPoint(index=len(points), n=n, m=m, sigma_z2=sigma_z2, snr_db=point_snr)
            )
    return points


def run_amp_trial(task: AmpTask) -> List[TrialRecord]:
    """One draw of (x, A, y) recovered by every configured denoiser."""
    config = task.config
    point = task.point
    model = config.signal_model
    rng = trial_stream(config.seed, point.index, task.trial)
    channel = MatrixChannelSpec(n=point.n, m=point.m, sigma_z2=point.sigma_z2)
    x = sample_signal(model, point.n, rng)
    A, y = sample_matrix_channel(x, channel, rng)

    records: List[TrialRecord] = []
    for kind in config.denoisers:
        amp_config = make_amp_config(
            kind,
            family=config.model,
            known_params=model if kind is DenoiserKind.BAYES else None,
            grid_theta=config.grid_theta,
            grid_mu=config.grid_mu,
            grid_sigma=config.grid_sigma,
            max_iters=config.max_iters,
            tol=config.tol,
        )
        started = time.perf_counter()
        mse: Optional[float] = None
        iterations: Optional[int] = None
        try:
            result = amp_run(A, y, channel, amp_config)
            mse = float(np.mean((result.x_hat - x) ** 2))
            iterations = result.iterations
        except (DivergenceError, NonFiniteError) as e:
            logger.warning(f"M={point.m} trial {task.trial}: {kind.value} failed ({e})")
        records.append(
            TrialRecord(
                experiment=config.experiment.value,
                point=point.index,
                trial=task.trial,
                seed=config.seed,
                method=kind.value,
                mse=mse,
                iterations=iterations,
                diverged=mse is None,
                wall_time=time.perf_counter() - started,
            )
        )
    return records


def _se_reference(config: SweepConfig, point: AmpPoint) -> Tuple[Optional[float], Optional[float]]:
    try:
        fixed = se_fixed_point(config.signal_model, point.m / point.n, point.sigma_z2)
    except ConvergenceError as e:
        logger.warning(f"No state-evolution reference at M={point.m}: {e}")
        return None, None
    return fixed.mmse, fixed.sdr_db


def _amp_row(config: SweepConfig, point: AmpPoint, **values: object) -> AmpRow:
    bg = config.model is Family.BG
    return AmpRow(
        model=config.model.value,
        n=point.n,
        m=point.m,
        snr_db=point.snr_db,
        theta=config.theta,
        mu=config.mu if bg else None,
        sigma_x2=config.sigma_x2 if bg else None,
        seed=config.seed,
        **values,
    )


def run_amp_sweep(config: SweepConfig, runner: Optional[SweepRunner] = None) -> List[AmpRow]:
    """Mean MSE and SDR of AMP per sweep point and denoiser, with the SE prediction.

    Diverged trials are counted and left out of the averages.
    """
    runner = runner or SweepRunner(config.workers)
    trials = config.trials or 1
    points = amp_points(config)
    logger.info(
        f"AMP sweep: N={config.n}, {len(points)} points, {trials} trials, "
        f"denoisers {', '.join(kind.value for kind in config.denoisers)}"
    )
    tasks = [AmpTask(config=config, point=p, trial=k) for p in points for k in range(trials)]
    results = runner.map(run_amp_trial, tasks, "amp sweep")

    by_point: Dict[int, List[TrialRecord]] = {p.index: [] for p in points}
    for records in results:
        for record in records:
            by_point[record.point].append(record)

    signal_variance = prior_variance(config.signal_model)
    rows: List[AmpRow] = []
    for point in points:
        se_mmse, se_sdr = _se_reference(config, point)
        for kind in config.denoisers:
            mine = [r for r in by_point[point.index] if r.method == kind.value]
            ok = [r for r in mine if not r.diverged]
            mse = float(np.mean([r.mse for r in ok])) if ok else None
            rows.append(
                _amp_row(
                    config,
                    point,
                    denoiser=kind.value,
                    trials=trials,
                    mse=mse,
                    sdr_db=sdr_db(signal_variance, mse) if mse is not None else None,
                    se_mmse=se_mmse,
                    se_sdr_db=se_sdr,
                    mean_iters=float(np.mean([r.iterations for r in ok])) if ok else None,
                    diverged_count=len(mine) - len(ok),
                )
            )
            if len(ok) < len(mine):
                failed = len(mine) - len(ok)
                logger.warning(f"M={point.m}: {kind.value} diverged in {failed} of {trials} trials")
    return rows


def run_se_curve(config: SweepConfig, runner: Optional[SweepRunner] = None) -> List[AmpRow]:
    """State-evolution MMSE and SDR at every sweep point, without Monte Carlo.

    Raises:
        ConvergenceError: state evolution did not settle at some point.
    """
    points = amp_points(config)
    logger.info(f"SE curve: N={config.n}, {len(points)} points")
    rows: List[AmpRow] = []
    for point in points:
        fixed = se_fixed_point(config.signal_model, point.m / point.n, point.sigma_z2)
        rows.append(
            _amp_row(
                config,
                point,
                denoiser="se",
                trials=0,
                mse=fixed.mmse,
                sdr_db=fixed.sdr_db,
                se_mmse=fixed.mmse,
                se_sdr_db=fixed.sdr_db,
                mean_iters=float(fixed.iterations),
                diverged_count=0,
            )
        )
    return rows


def run_experiment(
    config: SweepConfig, runner: Optional[SweepRunner] = None
) -> Tuple[List[Row], Type[Row]]:
    """Dispatch on the configured experiment; returns the rows and their row type."""
    if config.experiment is Experiment.SCALAR_SWEEP:
        return list(run_scalar_sweep(config, runner)), ScalarRow
    if config.experiment is Experiment.DENOISE_ONCE:
        return list(run_denoise_once(config, runner)), ScalarRow
    if config.experiment is Experiment.AMP_SWEEP:
        return list(run_amp_sweep(config, runner)), AmpRow
    return list(run_se_curve(config, runner)), AmpRow
