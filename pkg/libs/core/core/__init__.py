"""Core functionality shared across the MixD libraries."""

__version__ = "0.1.0"

from .exceptions import (
    ConvergenceError,
    DegenerateSignalError,
    DivergenceError,
    MixdConfigError,
    MixdDimensionError,
    MixdError,
    MixdNumericalError,
    MixdOutputError,
    NonFiniteError,
)
from .logger import setup_logging
from .rng import SeededStream

__all__ = [
    "ConvergenceError",
    "DegenerateSignalError",
    "DivergenceError",
    "MixdConfigError",
    "MixdDimensionError",
    "MixdError",
    "MixdNumericalError",
    "MixdOutputError",
    "NonFiniteError",
    "SeededStream",
    "setup_logging",
]
