"""Simulation and Monte Carlo verification of CLTs for Fourier transforms of stationary processes."""

from .estimators import FourierTransformer, PeriodogramTransformer
from .exceptions import ConfigurationError, MarkovSpecError
from .experiments import ExperimentConfig, Report, run_experiment
from .fourier import dft_at, fft_grid, partial_dft_path, periodogram_at
from .rng import derive_seed, sample_standard_normals
from .simulate import (
    GaussianFunctionalSpec,
    LinearSpec,
    MarkovSpec,
    Path,
    gen_gaussian_functional,
    gen_linear,
    gen_markov,
    generate,
    iid_gauss,
    ma1,
    slow_decay,
    two_state,
)
from .spectral import SpectralModel, spectral_model

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ExperimentConfig",
    "FourierTransformer",
    "GaussianFunctionalSpec",
    "LinearSpec",
    "MarkovSpec",
    "MarkovSpecError",
    "Path",
    "PeriodogramTransformer",
    "Report",
    "SpectralModel",
    "derive_seed",
    "dft_at",
    "fft_grid",
    "gen_gaussian_functional",
    "gen_linear",
    "gen_markov",
    "generate",
    "iid_gauss",
    "ma1",
    "partial_dft_path",
    "periodogram_at",
    "run_experiment",
    "sample_standard_normals",
    "slow_decay",
    "spectral_model",
    "two_state",
]
