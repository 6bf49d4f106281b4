"""Domain types for signal priors, channels, denoisers and solvers."""

from __future__ import annotations

from enum import Enum
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

SIGMA2_FLOOR = 1e-30


def floor_sigma2(value: float) -> float:
    """Floor a noise variance at SIGMA2_FLOOR; negative variances are invalid."""
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"noise variance must be a finite non-negative number, got {value}")
    return max(float(value), SIGMA2_FLOOR)


class Family(str, Enum):
    """Parametric prior families."""

    BERNOULLI = "bernoulli"
    BG = "bg"


class DenoiserKind(str, Enum):
    """Denoisers that can drive a scalar or matrix channel estimate."""

    BAYES = "bayes"
    PLUGIN = "plugin"
    MIXD = "mixd"


class BernoulliParams(BaseModel):
    """x_i = 1 with probability theta, 0 otherwise."""

    model_config = ConfigDict(frozen=True)

    family: Literal["bernoulli"] = "bernoulli"
    theta: float = Field(..., ge=0.0, le=1.0)


class BgParams(BaseModel):
    """Spike-and-slab prior: 0 with probability 1-theta, N(mu, sigma_x2) otherwise."""

    model_config = ConfigDict(frozen=True)

    family: Literal["bg"] = "bg"
    theta: float = Field(..., ge=0.0, le=1.0)
    mu: float = 0.0
    sigma_x2: float = Field(default=1.0, ge=0.0)

    @field_validator("mu")
    @classmethod
    def mu_must_be_finite(cls, v: float) -> float:
        if not np.isfinite(v):
            raise ValueError("mu must be finite")
        return v


SignalModel = Annotated[Union[BernoulliParams, BgParams], Field(discriminator="family")]


class ScalarChannelSpec(BaseModel):
    """y = x + z with z ~ N(0, sigma_z2)."""

    model_config = ConfigDict(frozen=True)

    sigma_z2: float

    @field_validator("sigma_z2")
    @classmethod
    def floor_noise(cls, v: float) -> float:
        return floor_sigma2(v)


class MatrixChannelSpec(BaseModel):
    """y = A x + z with A of shape (m, n) and z ~ N(0, sigma_z2)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1, description="Signal dimension")
    m: int = Field(..., ge=1, description="Number of measurements")
    sigma_z2: float

    @field_validator("sigma_z2")
    @classmethod
    def floor_noise(cls, v: float) -> float:
        return floor_sigma2(v)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def delta(self) -> float:
        """Measurement rate m/n."""
        return self.m / self.n


class ScalarPosterior(BaseModel):
    """Posterior mean and variance of one component given one observation."""

    model_config = ConfigDict(frozen=True)

    mean: float
    variance: float = Field(..., ge=0.0)


class DenoiserOutput(BaseModel):
    """Component-wise estimates and the average derivative of the denoiser."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    estimates: np.ndarray
    mean_derivative: float = Field(..., ge=0.0)
    params: Optional[SignalModel] = Field(
        default=None, description="Parameter point the estimates were computed at"
    )


class FitResult(BaseModel):
    """Maximum-likelihood parameter estimate."""

    model_config = ConfigDict(frozen=True)

    params: SignalModel
    log_likelihood: float
    iterations: int = Field(..., ge=0)
    converged: bool


class ParamGrid(BaseModel):
    """Quadrature nodes over the parameter space with log prior weights.

    Nodes are stored column-wise; ``mu`` and ``sigma_x2`` are ignored for Bernoulli grids.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    family: Family
    theta: np.ndarray
    mu: np.ndarray
    sigma_x2: np.ndarray
    log_prior_weights: np.ndarray

    @model_validator(mode="after")
    def check_shapes(self) -> ParamGrid:
        size = self.theta.shape[0] if self.theta.ndim == 1 else -1
        if size < 1:
            raise ValueError("a parameter grid needs at least one node")
        for name in ("mu", "sigma_x2", "log_prior_weights"):
            if getattr(self, name).shape != (size,):
                raise ValueError(f"{name} must have shape ({size},)")
        if not np.all(np.isfinite(self.log_prior_weights)):
            raise ValueError("log prior weights must be finite")
        return self

    @property
    def size(self) -> int:
        return int(self.theta.shape[0])

    def node(self, index: int) -> Union[BernoulliParams, BgParams]:
        if self.family is Family.BERNOULLI:
            return BernoulliParams(theta=float(self.theta[index]))
        return BgParams(
            theta=float(self.theta[index]),
            mu=float(self.mu[index]),
            sigma_x2=float(self.sigma_x2[index]),
        )

    @property
    def nodes(self) -> List[Union[BernoulliParams, BgParams]]:
        return [self.node(i) for i in range(self.size)]

    def subset(self, index: np.ndarray) -> ParamGrid:
        """Grid restricted to the given node indices (prior weights kept as-is)."""
        return ParamGrid(
            family=self.family,
            theta=self.theta[index],
            mu=self.mu[index],
            sigma_x2=self.sigma_x2[index],
            log_prior_weights=self.log_prior_weights[index],
        )


class ParamPosterior(BaseModel):
    """Normalized posterior weights over the nodes of a ParamGrid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    log_weights: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def expected(self, grid: ParamGrid, name: Literal["theta", "mu", "sigma_x2"]) -> float:
        """Posterior mean of one parameter over the grid."""
        return float(np.sum(self.weights * getattr(grid, name)))


class SePoint(BaseModel):
    """One state-evolution point: effective noise and the denoiser MSE at that noise."""

    model_config = ConfigDict(frozen=True)

    sigma_t2: float = Field(..., ge=0.0)
    mse: float = Field(..., ge=0.0)


class SeFixedPoint(BaseModel):
    """Converged state evolution."""

    model_config = ConfigDict(frozen=True)

    sigma_inf2: float
    mmse: float
    sdr_db: float
    iterations: int


class AmpState(BaseModel):
    """Iterate of the AMP recursion."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x_t: np.ndarray
    r_t: np.ndarray
    sigma_hat2: float = Field(..., ge=0.0, description="Noise estimate from r_t")
    t: int = Field(default=0, ge=0)
    mean_derivative: float = Field(
        default=0.0, ge=0.0, description="<eta'> of the pass that produced x_t"
    )
    params: Optional[SignalModel] = Field(
        default=None, description="Last Plug-in estimate, reused when warm starting"
    )


class AmpConfig(BaseModel):
    """Denoiser choice and stopping rules for an AMP run."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    denoiser: DenoiserKind = DenoiserKind.MIXD
    max_iters: int = Field(default=200, ge=1)
    tol: float = Field(default=1e-8, gt=0.0)
    grid: Optional[ParamGrid] = None
    known_params: Optional[SignalModel] = None
    family: Optional[Family] = None
    warm_start: bool = False
    onsager: bool = True
    divergence_factor: float = Field(default=10.0, gt=1.0)

    @model_validator(mode="after")
    def check_denoiser_inputs(self) -> AmpConfig:
        if self.denoiser is DenoiserKind.MIXD and self.grid is None:
            raise ValueError("the mixd denoiser needs a parameter grid")
        if self.denoiser is DenoiserKind.BAYES and self.known_params is None:
            raise ValueError("the bayes denoiser needs known parameters")
        if self.denoiser is DenoiserKind.PLUGIN and self.plugin_family is None:
            raise ValueError("the plugin denoiser needs a family or known parameters")
        return self

    @property
    def plugin_family(self) -> Optional[Family]:
        if self.family is not None:
            return self.family
        if self.known_params is not None:
            return Family(self.known_params.family)
        return None


class AmpIteration(BaseModel):
    """Per-iteration diagnostics of an AMP run."""

    model_config = ConfigDict(frozen=True)

    t: int
    sigma_hat2: float
    mean_derivative: float
    mse: Optional[float] = None


class AmpResult(BaseModel):
    """Final AMP estimate and its iteration history."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x_hat: np.ndarray
    history: List[AmpIteration] = Field(default_factory=list)
    iterations: int
    converged: bool
