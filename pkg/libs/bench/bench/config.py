"""Sweep configuration: defaults, INI files, environment and command-line flags."""

from __future__ import annotations

import configparser
import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from core import MixdConfigError
from core.logger import LOG_LEVEL_ENV, resolve_level
from mixd import DenoiserKind, Family, make_model, prior_variance
from mixd.mixd import DEFAULT_AMP_BG_K, DEFAULT_BERNOULLI_K, DEFAULT_BG_K
from mixd.model import Model, db_to_linear

logger = logging.getLogger(__name__)

WORKERS_ENV = "MIXD_WORKERS"

DEFAULT_N_LIST: List[int] = [int(v) for v in np.round(np.logspace(1, 3, 20))]
DEFAULT_SCALAR_TRIALS = 200_000
DEFAULT_AMP_TRIALS = 10

LIST_KEYS = {"n_list", "m_list", "snr_db", "denoisers"}
KEY_ALIASES = {"family": "model", "denoiser": "denoisers", "output": "out"}
# Setting one of a pair from the command line drops the other from the file.
EXCLUSIVE_KEYS = [("sigma_z2", "snr_db")]


class Experiment(str, Enum):
    """CLI subcommands."""

    SCALAR_SWEEP = "scalar-sweep"
    AMP_SWEEP = "amp-sweep"
    SE_CURVE = "se-curve"
    DENOISE_ONCE = "denoise-once"

    @property
    def is_matrix(self) -> bool:
        return self in (Experiment.AMP_SWEEP, Experiment.SE_CURVE)


class SweepConfig(BaseModel):
    """Everything one CLI run needs. Unset values are filled per experiment."""

    experiment: Experiment
    model: Family = Family.BERNOULLI
    theta: float = Field(default=0.05, ge=0.0, le=1.0)
    mu: float = 0.0
    sigma_x2: float = Field(default=1.0, ge=0.0)

    sigma_z2: Optional[float] = Field(default=None, ge=0.0)
    snr_db: List[float] = Field(default_factory=list)

    n: Optional[int] = Field(default=None, ge=1)
    n_list: List[int] = Field(default_factory=lambda: list(DEFAULT_N_LIST))
    m_list: List[int] = Field(default_factory=list)

    trials: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0, le=2**64 - 1)
    denoisers: List[DenoiserKind] = Field(default_factory=list)

    grid_theta: Optional[int] = Field(default=None, ge=1)
    grid_mu: Optional[int] = Field(default=None, ge=1)
    grid_sigma: Optional[int] = Field(default=None, ge=1)

    max_iters: int = Field(default=200, ge=1)
    tol: float = Field(default=1e-8, gt=0.0)

    workers: int = Field(default=1, ge=1)
    log_level: str = "info"
    out: Optional[Path] = None
    svg: Optional[Path] = None

    @field_validator("n_list", "m_list")
    @classmethod
    def sizes_positive(cls, v: List[int]) -> List[int]:
        if any(size < 1 for size in v):
            raise ValueError("sizes must be at least 1")
        return v

    @field_validator("log_level")
    @classmethod
    def known_log_level(cls, v: str) -> str:
        resolve_level(v)
        return v.strip().lower()

    @model_validator(mode="after")
    def fill_experiment_defaults(self) -> SweepConfig:
        exp = self.experiment
        if self.trials is None:
            self.trials = {
                Experiment.SCALAR_SWEEP: DEFAULT_SCALAR_TRIALS,
                Experiment.AMP_SWEEP: DEFAULT_AMP_TRIALS,
            }.get(exp, 1)
        if not self.denoisers:
            self.denoisers = (
                [DenoiserKind.MIXD, DenoiserKind.PLUGIN]
                if exp in (Experiment.SCALAR_SWEEP, Experiment.DENOISE_ONCE)
                else [DenoiserKind.MIXD]
            )
        if self.model is Family.BERNOULLI:
            self.grid_theta = self.grid_theta or DEFAULT_BERNOULLI_K
        else:
            k = DEFAULT_AMP_BG_K if exp.is_matrix else DEFAULT_BG_K
            self.grid_theta = self.grid_theta or k
            self.grid_mu = self.grid_mu or k
            self.grid_sigma = self.grid_sigma or k
        return self

    @model_validator(mode="after")
    def check_sweep_points(self) -> SweepConfig:
        exp = self.experiment
        if self.sigma_z2 is not None and self.snr_db:
            raise ValueError("give either sigma_z2 or snr_db, not both")
        if exp is Experiment.SCALAR_SWEEP and not self.n_list:
            raise ValueError("scalar-sweep needs at least one N")
        if exp is Experiment.DENOISE_ONCE and self.n is None:
            raise ValueError("denoise-once needs --n")
        if not exp.is_matrix:
            if self.sigma_z2 is None and len(self.snr_db) != 1:
                raise ValueError(f"{exp.value} needs --sigma-z2 or a single --snr-db")
            return self
        if self.n is None:
            raise ValueError(f"{exp.value} needs --n")
        if not self.m_list:
            raise ValueError(f"{exp.value} needs at least one M")
        if self.sigma_z2 is None and not self.snr_db:
            raise ValueError(f"{exp.value} needs --sigma-z2 or --snr-db")
        return self

    @property
    def signal_model(self) -> Model:
        return make_model(self.model, self.theta, self.mu, self.sigma_x2)

    @property
    def scalar_sigma_z2(self) -> float:
        """Noise variance of the scalar channel; an SNR is taken as Var(x) / sigma_z2."""
        if self.sigma_z2 is not None:
            return self.sigma_z2
        return prior_variance(self.signal_model) / db_to_linear(self.snr_db[0])

    @property
    def grid_sizes(self) -> Tuple[int, int, int]:
        return (self.grid_theta or 1, self.grid_mu or 1, self.grid_sigma or 1)

    @classmethod
    def env_defaults(cls) -> Dict[str, Any]:
        """Values taken from MIXD_WORKERS and MIXD_LOG_LEVEL when set."""
        values: Dict[str, Any] = {}
        if os.environ.get(WORKERS_ENV):
            values["workers"] = os.environ[WORKERS_ENV]
        if os.environ.get(LOG_LEVEL_ENV):
            values["log_level"] = os.environ[LOG_LEVEL_ENV]
        return values


def _split_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def load_config_file(path: Path) -> Dict[str, Any]:
    """Flatten an INI file into SweepConfig field names.

    Keys in a ``[grid]`` section get a ``grid_`` prefix; list-valued keys are
    comma-separated.
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except OSError as e:
        raise MixdConfigError(f"Cannot read config file {path}: {e}") from e
    except configparser.Error as e:
        raise MixdConfigError(f"Malformed config file {path}: {e}") from e

    values: Dict[str, Any] = {}
    for section in parser.sections():
        for raw_key, raw_value in parser.items(section):
            key = raw_key.strip().replace("-", "_")
            key = KEY_ALIASES.get(key, key)
            if section == "grid" and not key.startswith("grid_"):
                key = f"grid_{key}"
            values[key] = _split_list(raw_value) if key in LIST_KEYS else raw_value.strip()
    logger.debug(f"Loaded {len(values)} settings from {path}")
    return values


def build_config(
    experiment: Experiment,
    file_values: Optional[Mapping[str, Any]] = None,
    cli_values: Optional[Mapping[str, Any]] = None,
) -> SweepConfig:
    """Merge environment, file and flag values (later wins) and validate.

    Raises:
        MixdConfigError: the merged values do not form a valid configuration.
    """
    flags = {k: v for k, v in (cli_values or {}).items() if v is not None}
    merged: Dict[str, Any] = SweepConfig.env_defaults()
    merged.update(file_values or {})
    for first, second in EXCLUSIVE_KEYS:
        if first in flags:
            merged.pop(second, None)
        if second in flags:
            merged.pop(first, None)
    merged.update(flags)
    merged["experiment"] = experiment
    try:
        return SweepConfig(**merged)
    except ValidationError as e:
        raise MixdConfigError(f"Invalid configuration: {e}") from e
