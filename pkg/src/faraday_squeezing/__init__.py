"""Polarization squeezing by double-pass Faraday interaction with atomic ensembles."""

from .closed_forms import (
    OptimumReport,
    PulseVariances,
    SpectrumPoint,
    apply_output_loss,
    optimize_beta,
    pulse_variances,
    pulse_variances_undamped,
    to_decibel,
    twocell_sideband_limit,
    twocell_spectrum,
    v_opt,
    vx_spectrum,
    vx_zero,
)
from .errors import (
    ConvergenceError,
    DomainError,
    FaradaySqueezingError,
    GammaPZero,
    NonPositiveVariance,
    RegimeError,
    SingularMatrix,
    StepTooLarge,
    UnstableStep,
)
from .linear_io import (
    ExtendedPulseModel,
    LinearIOModel,
    NoiseChannel,
    build_single_cell,
    build_two_cell,
    covariance_propagate,
    freq_response,
    output_spectra,
    pulse_variances_numeric,
    spectrum_from_response,
    vp_spectrum_numeric,
)
from .params import (
    CouplingParams,
    DerivedRates,
    MicroscopicParams,
    derive_coupling,
    derive_rates,
    mean_spin_fraction,
    pulse_rates,
)
from .stochastic import SimConfig, estimate_pulse_variance, estimate_spectrum, simulate_cw

__version__ = "0.1.0"
