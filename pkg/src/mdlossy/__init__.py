"""Moderate-deviation analysis of lossy source coding: rate-distortion
functions, dispersion, error exponents and exact finite-blocklength checks."""

from .core_math import NType, Pmf, binary_entropy, entropy, kl_divergence, log_sum_exp
from .dispersion import dispersion_binary_hamming, dispersion_dms, dispersion_gaussian, max_dispersion_bernoulli, rd_derivative
from .errors import ComputationError, ToolkitError, ValidationError
from .exponents import (
    ExponentResult,
    correct_exponent_dms,
    gaussian_correct_exponent,
    gaussian_excess_exponent,
    marton_exponent_dms,
    md_exponent_prediction,
    quadratic_limit_ratio,
)
from .rd_solver import (
    DistortionSpec,
    DmsProblem,
    GaussianProblem,
    SolverOptions,
    rate_distortion_binary_hamming,
    rate_distortion_dms,
    rate_distortion_gaussian,
    tilted_information,
)

__version__ = "0.1.0"
