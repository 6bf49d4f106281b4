from pathlib import Path
from typing import Any, List, Optional, Union


class MixdError(Exception):
    """Base exception for all MixD errors."""

    exit_code = 1


class MixdConfigError(MixdError):
    """Raised when an experiment or solver configuration is invalid."""

    exit_code = 2


class MixdDimensionError(MixdError, ValueError):
    """Raised when vector and matrix shapes do not agree."""

    pass


class MixdNumericalError(MixdError):
    """Raised when a computation produces unusable numbers."""

    exit_code = 3


class DegenerateSignalError(MixdNumericalError):
    """Raised when a signal prior has zero variance where a positive one is required."""

    def __init__(self, message: str = "degenerate signal"):
        super().__init__(message)


class NonFiniteError(MixdNumericalError):
    """Raised when an iterate contains NaN or infinite entries."""

    def __init__(self, message: str, iteration: Optional[int] = None):
        self.iteration = iteration
        super().__init__(message)


class DivergenceError(MixdNumericalError):
    """Raised when the AMP effective noise blows up."""

    def __init__(self, message: str, history: Optional[List[Any]] = None):
        self.history = history or []
        super().__init__(message)


class ConvergenceError(MixdNumericalError):
    """Raised when a fixed-point iteration runs out of iterations."""

    def __init__(self, message: str, last_iterate: Optional[float] = None):
        self.last_iterate = last_iterate
        super().__init__(message)


class MixdOutputError(MixdError):
    """Raised when a result file cannot be read or written."""

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path is not None else None
        super().__init__(f"{message}: {path}" if path is not None else message)
