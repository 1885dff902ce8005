"""Lanczos coefficient toolkit: exact sequence generation for classical and
quantum chaotic models, transformer-based autoregressive extrapolation, and
comparison against staggered asymptotic fits at the coefficient and
observable level."""

from .baseline import FitParams, baseline_predict, extrapolate_baseline, fit_baseline
from .chain import (
    ObservableSeries,
    autocorrelation,
    build_tridiagonal,
    evolve,
    from_increments,
    krylov_complexity,
    moments_from_tridiagonal,
    moments_to_lanczos,
    observable_series,
    to_increments,
)
from .classical import XyzParams, lanczos_generate_classical, sample_xyz
from .estimators import AsymptoticFitExtrapolator, TransformerExtrapolator
from .evaluate import compare_methods, observable_errors, rmse_per_index
from .model import (
    MaskPolicy,
    ModelConfig,
    averaged_attention_map,
    extrapolate,
    forward,
    init_params,
    parameter_count,
    positional_encoding,
    softmax,
)
from .sphere import SpherePolynomial, poisson_bracket, sphere_inner, xyz_hamiltonian
from .tfim import TfimParams, build_hamiltonian, lanczos_generate, liouvillian_apply, sample_tfim
from .training import TrainConfig, TrainReport, adamw_step, gradients, loss, train

__version__ = "0.1.0"

__all__ = [
    "AsymptoticFitExtrapolator",
    "FitParams",
    "MaskPolicy",
    "ModelConfig",
    "ObservableSeries",
    "SpherePolynomial",
    "TfimParams",
    "TrainConfig",
    "TrainReport",
    "TransformerExtrapolator",
    "XyzParams",
    "adamw_step",
    "autocorrelation",
    "averaged_attention_map",
    "baseline_predict",
    "build_hamiltonian",
    "build_tridiagonal",
    "compare_methods",
    "evolve",
    "extrapolate",
    "extrapolate_baseline",
    "fit_baseline",
    "forward",
    "from_increments",
    "gradients",
    "init_params",
    "krylov_complexity",
    "lanczos_generate",
    "lanczos_generate_classical",
    "liouvillian_apply",
    "loss",
    "moments_from_tridiagonal",
    "moments_to_lanczos",
    "observable_errors",
    "observable_series",
    "parameter_count",
    "poisson_bracket",
    "positional_encoding",
    "rmse_per_index",
    "sample_tfim",
    "sample_xyz",
    "softmax",
    "sphere_inner",
    "to_increments",
    "train",
    "xyz_hamiltonian",
]
