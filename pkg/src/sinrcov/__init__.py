"""SINR coverage probability toolkit for Poisson cellular downlinks."""

from .error_analysis import (
    TailErrorReport,
    convergence_slope,
    expected_tail_truncation_error,
    tail_error_report,
    tail_truncation_error,
    tail_truncation_error_bound,
)
from .estimators import (
    CoverageCurve,
    EstimatorError,
    EstimatorSettings,
    ModelValidityError,
    ProbModelParams,
    ThresholdGrid,
    empirical_coverage,
    hybrid_coverage,
    hybrid_sample_value,
    interference_moment_coefficient,
    prob_model_coverage,
    sg_coverage,
)
from .geometry import (
    NetworkConfig,
    PppRealization,
    nearest_window_distances,
    sample_ordered_distances_direct,
    sample_window_realization,
    serving_distance_density,
)
from .quadrature import (
    Integral1D,
    QuadratureError,
    integrate_adaptive,
    tail_integral,
    tail_integral_batch,
    tail_integral_closed_form,
    tail_integrand,
)
from .streams import trial_stream

__version__ = "0.1.0"

__all__ = [
    "CoverageCurve",
    "EstimatorError",
    "EstimatorSettings",
    "Integral1D",
    "ModelValidityError",
    "NetworkConfig",
    "PppRealization",
    "ProbModelParams",
    "QuadratureError",
    "TailErrorReport",
    "ThresholdGrid",
    "convergence_slope",
    "empirical_coverage",
    "expected_tail_truncation_error",
    "hybrid_coverage",
    "hybrid_sample_value",
    "integrate_adaptive",
    "interference_moment_coefficient",
    "nearest_window_distances",
    "prob_model_coverage",
    "sample_ordered_distances_direct",
    "sample_window_realization",
    "serving_distance_density",
    "sg_coverage",
    "tail_error_report",
    "tail_integral",
    "tail_integral_batch",
    "tail_integral_closed_form",
    "tail_integrand",
    "tail_truncation_error",
    "tail_truncation_error_bound",
    "trial_stream",
    "__version__",
]

