"""
Command-line interface for the MixD benchmark sweeps.
"""

import argparse
import logging
from typing import Any, Dict, List, Optional

from core import MixdConfigError, MixdError, setup_logging
from mixd import DenoiserKind, Family

from .config import Experiment, build_config, load_config_file
from .plot import emit_svg
from .report import emit_csv
from .sweeps import run_experiment

logger = logging.getLogger(__name__)

# Parsed attributes that are not SweepConfig fields.
NON_CONFIG_ARGS = {"command", "config"}


def int_list(value: str) -> List[int]:
    """Comma-separated positive integers, e.g. ``10,20,40``."""
    try:
        items = [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {value!r}"
        ) from None
    if not items:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return items


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    model = parser.add_argument_group("signal model")
    model.add_argument("--model", choices=[f.value for f in Family], help="Prior family")
    model.add_argument("--theta", type=float, help="Probability of a nonzero component")
    model.add_argument("--mu", type=float, help="Slab mean (bg only)")
    model.add_argument("--sigma-x2", type=float, help="Slab variance (bg only)")

    channel = parser.add_argument_group("channel").add_mutually_exclusive_group()
    channel.add_argument("--sigma-z2", type=float, help="Noise variance")
    channel.add_argument(
        "--snr-db",
        type=float,
        action="append",
        help="Signal-to-noise ratio in dB (repeatable for matrix sweeps)",
    )

    sweep = parser.add_argument_group("sweep")
    sweep.add_argument("--n", type=int, help="Signal dimension")
    sweep.add_argument("--n-list", type=int_list, help="Signal dimensions for scalar sweeps")
    sweep.add_argument("--m-list", type=int_list, help="Measurement counts for matrix sweeps")
    sweep.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    sweep.add_argument("--seed", type=int, help="Master seed (default: 0)")
    sweep.add_argument(
        "--denoiser",
        dest="denoisers",
        choices=[k.value for k in DenoiserKind],
        action="append",
        help="Denoiser to run (repeatable)",
    )
    sweep.add_argument("--max-iters", type=int, help="AMP iteration limit (default: 200)")
    sweep.add_argument("--tol", type=float, help="AMP relative-change tolerance (default: 1e-8)")
    sweep.add_argument("--workers", type=int, help="Worker processes (default: 1)")

    grid = parser.add_argument_group("MixD grid")
    grid.add_argument("--grid-theta", type=int, help="Nodes along theta")
    grid.add_argument("--grid-mu", type=int, help="Nodes along mu (bg only)")
    grid.add_argument("--grid-sigma", type=int, help="Nodes along sigma_x (bg only)")

    output = parser.add_argument_group("output")
    output.add_argument("--out", help="CSV output path (default: standard output)")
    output.add_argument("--svg", help="Also plot the rows to this SVG file")
    output.add_argument("--config", help="INI file with default settings; flags override it")
    output.add_argument(
        "--log-level",
        choices=["debug", "info", "warning", "error", "critical"],
        help="Logging level (default: MIXD_LOG_LEVEL or info)",
    )


def parse_args(args: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(
        prog="mixd-bench",
        description="Monte Carlo benchmarks of the Bayes, Plug-in and MixD denoisers",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        Experiment.SCALAR_SWEEP: "Excess MSE over the MMSE against N on the scalar channel",
        Experiment.AMP_SWEEP: "AMP recovery SDR against M on the matrix channel",
        Experiment.SE_CURVE: "State-evolution SDR against M, without Monte Carlo",
        Experiment.DENOISE_ONCE: "Scalar trials at a single N",
    }
    for experiment, text in helps.items():
        _add_common_flags(subparsers.add_parser(experiment.value, help=text, description=text))
    return parser.parse_args(args)


def _configure_logging(level: Optional[str]) -> None:
    try:
        setup_logging(level)
    except ValueError as e:
        raise MixdConfigError(str(e)) from e


def main(args: Optional[List[str]] = None) -> int:
    """Main entry point for the CLI. Returns the process exit code."""
    parsed = parse_args(args)
    cli_values: Dict[str, Any] = {
        k: v for k, v in vars(parsed).items() if k not in NON_CONFIG_ARGS
    }
    try:
        _configure_logging(parsed.log_level)
        file_values = load_config_file(parsed.config) if parsed.config else {}
        config = build_config(Experiment(parsed.command), file_values, cli_values)
        setup_logging(config.log_level)
        logger.info(f"Running {config.experiment.value} with seed {config.seed}")
        rows, row_type = run_experiment(config)
        emit_csv(rows, config.out, row_type)
        if config.svg is not None:
            emit_svg(rows, config.svg)
    except KeyboardInterrupt:
        logger.info("Sweep stopped by user")
        return 130
    except MixdError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
