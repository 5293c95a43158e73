"""Differences of centered Gaussian measures over centered Euclidean balls.

Exact route: an s-integral of truncated second moments of weighted chi-square
sums, evaluated by characteristic-function inversion.  Monte Carlo route:
seeded, counter-based estimators for every analytic quantity.
"""
from .anticoncentration import (
    ShiftQuery,
    ac1_bound,
    ac1_constant,
    density_bound,
    density_chd,
    kl_scaled_pair,
    pinsker_bound,
    shift_to_scaling,
)
from .comparison import (
    BoundReport,
    DifferenceCurve,
    c_p_constant,
    comparison_bound,
    difference_at,
    difference_curve,
)
from .config import InversionConfig, McConfig, NumericsConfig
from .mc import Estimate, ball_probability, kolmogorov_distance, sample_gaussian, stein_residual
from .quadform import QuadFormSpec, cdf, truncated_centered_sum, truncated_second_moment
from .smoothing import KernelParam, kernel, ode_residual, smoothed_difference
from .spd import (
    GaussianPair,
    SpdMatrix,
    SymEigen,
    interpolate,
    log_prime,
    log_prime_det,
    sym_eigen,
    trace_divergence,
    validate_spd,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "DifferenceCurve", "Estimate", "GaussianPair", "InversionConfig", "KernelParam",
    "McConfig", "NumericsConfig", "QuadFormSpec", "ShiftQuery", "SpdMatrix", "SymEigen",
    "ac1_bound", "ac1_constant", "ball_probability", "c_p_constant", "cdf", "comparison_bound",
    "density_bound", "density_chd", "difference_at", "difference_curve", "interpolate",
    "kernel", "kl_scaled_pair", "kolmogorov_distance", "log_prime", "log_prime_det",
    "ode_residual", "pinsker_bound", "sample_gaussian", "shift_to_scaling", "smoothed_difference",
    "stein_residual", "sym_eigen", "trace_divergence", "truncated_centered_sum",
    "truncated_second_moment", "validate_spd",
]
