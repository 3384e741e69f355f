from .compare import (
    DEFAULT_PROBE_T,
    METRIC_COLUMNS,
    Comparison,
    PointwiseBounds,
    Probe,
    coefficient_discrepancy,
    compare,
    default_probes,
    mid_gap,
    pointwise_bounds,
)
from .model import (
    AsymptoticModel,
    asymptotic_gradient,
    boundary_sup_norm,
    check_in_gap,
    model_from_factors,
    model_from_solution,
    model_from_squares,
)

__all__ = [
    "DEFAULT_PROBE_T",
    "METRIC_COLUMNS",
    "AsymptoticModel",
    "Comparison",
    "PointwiseBounds",
    "Probe",
    "asymptotic_gradient",
    "boundary_sup_norm",
    "check_in_gap",
    "coefficient_discrepancy",
    "compare",
    "default_probes",
    "mid_gap",
    "model_from_factors",
    "model_from_solution",
    "model_from_squares",
    "pointwise_bounds",
]
