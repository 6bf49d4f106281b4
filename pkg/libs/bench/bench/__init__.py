"""
MixD benchmark harness.
Monte Carlo sweeps of the MixD, Plug-in and Bayes denoisers with CSV and SVG output.
"""

from __future__ import annotations

__version__: str = "0.1.0"

from .config import Experiment, SweepConfig, build_config, load_config_file
from .plot import emit_svg
from .records import AmpRow, ScalarRow, TrialBatch, TrialRecord
from .report import emit_csv, parse_csv
from .runner import SweepRunner
from .sweeps import (
    run_amp_sweep,
    run_denoise_once,
    run_experiment,
    run_scalar_sweep,
    run_se_curve,
)

__all__ = [
    "AmpRow",
    "Experiment",
    "ScalarRow",
    "SweepConfig",
    "SweepRunner",
    "TrialBatch",
    "TrialRecord",
    "build_config",
    "emit_csv",
    "emit_svg",
    "load_config_file",
    "parse_csv",
    "run_amp_sweep",
    "run_cli",
    "run_denoise_once",
    "run_experiment",
    "run_scalar_sweep",
    "run_se_curve",
]


def run_cli() -> None:
    """Entry point for CLI"""
    import sys

    from .cli import main

    sys.exit(main())
