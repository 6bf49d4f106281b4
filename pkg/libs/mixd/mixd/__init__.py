"""Bayes, Plug-in and MixD denoisers with an AMP solver and state-evolution oracles."""

__version__ = "0.1.0"

from .amp import amp_run, amp_step, estimate_noise, make_amp_config, pseudo_data
from .denoise import (
    bayes_denoise,
    bernoulli_posterior,
    bg_posterior,
    posterior_moments,
)
from .fit import (
    bernoulli_log_likelihood,
    bg_log_likelihood,
    fit_bernoulli_ml,
    fit_bg_ml,
    fit_ml,
    grid_search_bernoulli_ml,
    plugin_denoise,
)
from .mixd import (
    build_bernoulli_grid,
    build_bg_grid,
    build_grid,
    grid_log_likelihoods,
    log_marginal_likelihood,
    mixd_denoise,
    mixd_divergence_mc,
    param_posterior,
)
from .model import (
    db_to_linear,
    linear_to_db,
    make_model,
    prior_mean,
    prior_variance,
    sample_matrix_channel,
    sample_scalar_channel,
    sample_signal,
    sigma_z2_from_snr,
)
from .oracle import (
    SeDenoiser,
    mixd_bruteforce,
    scalar_mmse,
    scalar_mmse_mc,
    sdr_db,
    se_fixed_point,
    se_step,
    se_trajectory,
)
from .types import (
    AmpConfig,
    AmpIteration,
    AmpResult,
    AmpState,
    BernoulliParams,
    BgParams,
    DenoiserKind,
    DenoiserOutput,
    Family,
    FitResult,
    MatrixChannelSpec,
    ParamGrid,
    ParamPosterior,
    ScalarChannelSpec,
    ScalarPosterior,
    SeFixedPoint,
    SePoint,
    SignalModel,
)

__all__ = [
    # Types
    "AmpConfig",
    "AmpIteration",
    "AmpResult",
    "AmpState",
    "BernoulliParams",
    "BgParams",
    "DenoiserKind",
    "DenoiserOutput",
    "Family",
    "FitResult",
    "MatrixChannelSpec",
    "ParamGrid",
    "ParamPosterior",
    "ScalarChannelSpec",
    "ScalarPosterior",
    "SeDenoiser",
    "SeFixedPoint",
    "SePoint",
    "SignalModel",
    # Model
    "db_to_linear",
    "linear_to_db",
    "make_model",
    "prior_mean",
    "prior_variance",
    "sample_matrix_channel",
    "sample_scalar_channel",
    "sample_signal",
    "sigma_z2_from_snr",
    # Denoisers
    "bayes_denoise",
    "bernoulli_posterior",
    "bg_posterior",
    "posterior_moments",
    "plugin_denoise",
    "mixd_denoise",
    "mixd_divergence_mc",
    # Fitting
    "bernoulli_log_likelihood",
    "bg_log_likelihood",
    "fit_bernoulli_ml",
    "fit_bg_ml",
    "fit_ml",
    "grid_search_bernoulli_ml",
    # Grids
    "build_bernoulli_grid",
    "build_bg_grid",
    "build_grid",
    "grid_log_likelihoods",
    "log_marginal_likelihood",
    "param_posterior",
    # Oracles
    "mixd_bruteforce",
    "scalar_mmse",
    "scalar_mmse_mc",
    "sdr_db",
    "se_fixed_point",
    "se_step",
    "se_trajectory",
    # AMP
    "amp_run",
    "amp_step",
    "estimate_noise",
    "make_amp_config",
    "pseudo_data",
]
