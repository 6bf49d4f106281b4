"""Logging utilities shared by the MixD libraries."""

import logging
import os
from typing import Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_LEVEL_ENV = "MIXD_LOG_LEVEL"


def resolve_level(level: Union[str, int, None]) -> int:
    """Turn a level name or a stdlib level into a stdlib level.

    ``None`` falls back to the ``MIXD_LOG_LEVEL`` environment variable, then INFO.
    """
    if level is None:
        level = os.environ.get(LOG_LEVEL_ENV, "info")
    if isinstance(level, int):
        return level
    value = getattr(logging, level.strip().upper(), None)
    if not isinstance(value, int):
        raise ValueError(f"Unknown log level: {level}")
    return value


def setup_logging(level: Union[str, int, None] = None) -> int:
    """Configure the root logger for command-line use and return the level applied."""
    resolved = resolve_level(level)
    logging.basicConfig(level=resolved, format=LOG_FORMAT)
    logging.getLogger().setLevel(resolved)
    return resolved
