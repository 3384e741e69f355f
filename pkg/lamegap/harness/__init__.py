from .config import (
    DEFAULT_EPSILONS,
    BoundaryBlock,
    ExperimentConfig,
    GeometryBlock,
    MaterialBlock,
    MeshBlock,
    OutputBlock,
    Preset,
    ProbeBlock,
    RunBlock,
    Shape,
    load_config,
    parse_list,
    parse_number,
    trace_table_field,
    validate_config,
)
from .pipelines import (
    SolveResult,
    coefficient_frame,
    coefficient_models,
    run_asymptotic,
    run_factors,
    run_solve,
    run_squares,
    squares_constants,
)
from .rates import RateFit, fit_rate
from .report import generate_summary, rate_plot, write_report
from .plot import LogLogPlot
from .sweep import (
    FIT_TOLERANCE,
    EpsilonResult,
    SweepReport,
    SweepRunner,
    fit_quantities,
    gap_decay,
    predicted_exponents,
    run_sweep,
    stage,
    touching_factors,
)

__all__ = [
    "DEFAULT_EPSILONS",
    "FIT_TOLERANCE",
    "BoundaryBlock",
    "EpsilonResult",
    "ExperimentConfig",
    "GeometryBlock",
    "LogLogPlot",
    "MaterialBlock",
    "MeshBlock",
    "OutputBlock",
    "Preset",
    "ProbeBlock",
    "RateFit",
    "RunBlock",
    "Shape",
    "SolveResult",
    "SweepReport",
    "SweepRunner",
    "coefficient_frame",
    "coefficient_models",
    "fit_quantities",
    "fit_rate",
    "gap_decay",
    "generate_summary",
    "load_config",
    "parse_list",
    "parse_number",
    "predicted_exponents",
    "rate_plot",
    "run_asymptotic",
    "run_factors",
    "run_solve",
    "run_squares",
    "run_sweep",
    "squares_constants",
    "stage",
    "touching_factors",
    "trace_table_field",
    "validate_config",
    "write_report",
]
