"""Per-trial records and the aggregated rows written to CSV."""

from __future__ import annotations

from typing import Dict, List, Optional, Type, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def check_mse(value: float) -> float:
    """An MSE must be finite and non-negative."""
    if not np.isfinite(value) or value < 0.0:
        raise ValueError(f"MSE must be finite and non-negative, got {value}")
    return float(value)


class TrialRecord(BaseModel):
    """Outcome of one method on one trial of one sweep point."""

    model_config = ConfigDict(frozen=True)

    experiment: str
    point: int = Field(..., ge=0, description="Index of the sweep point")
    trial: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    method: str
    mse: Optional[float] = Field(default=None, description="None when the run diverged")
    mmse: Optional[float] = None
    iterations: Optional[int] = None
    diverged: bool = False
    wall_time: float = Field(default=0.0, ge=0.0)

    @field_validator("mse")
    @classmethod
    def mse_is_valid(cls, v: Optional[float]) -> Optional[float]:
        return None if v is None else check_mse(v)


class TrialBatch(BaseModel):
    """Per-trial MSEs of consecutive scalar trials, one array per method."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    point: int = Field(..., ge=0)
    first_trial: int = Field(..., ge=0)
    mse: Dict[str, np.ndarray]
    wall_time: float = Field(default=0.0, ge=0.0)

    @field_validator("mse")
    @classmethod
    def mse_is_valid(cls, v: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
        for method, values in v.items():
            if not np.all(np.isfinite(values)) or np.any(values < 0.0):
                raise ValueError(f"MSE of {method} must be finite and non-negative")
        return v


class ScalarRow(BaseModel):
    """One (N, method) row of a scalar-channel sweep."""

    model: str
    n: int
    trials: int
    seed: int
    method: str
    mse: float
    mmse: float
    excess_mse: float
    stderr: Optional[float] = None


class AmpRow(BaseModel):
    """One (sweep point, denoiser) row of a matrix-channel sweep or SE curve."""

    model: str
    n: int
    m: int
    snr_db: float
    theta: float
    mu: Optional[float] = None
    sigma_x2: Optional[float] = None
    denoiser: str
    trials: int
    seed: int
    mse: Optional[float] = None
    sdr_db: Optional[float] = None
    se_mmse: Optional[float] = None
    se_sdr_db: Optional[float] = None
    mean_iters: Optional[float] = None
    diverged_count: int = 0


Row = Union[ScalarRow, AmpRow]
ROW_TYPES: List[Type[Row]] = [ScalarRow, AmpRow]


def columns(row_type: Type[Row]) -> List[str]:
    """CSV header of a row type, in field order."""
    return list(row_type.model_fields)
