"""The work behind each CLI subcommand, free of any terminal output."""

import logging
from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from lamegap.asymptotics import constants
from lamegap.errors import ConfigError
from lamegap.factors import FactorMatrices, GeometryConstants, squares_geometry_constants, write_factors
from lamegap.fem import CoefficientSolution, FieldSolution, solve_limit_problem, write_solution
from lamegap.geometry import build_mesh, mesh_statistics
from lamegap.reconstruction import AsymptoticModel, model_from_factors, model_from_squares, pointwise_bounds

from .config import ExperimentConfig, Shape
from .report import FLOAT_FORMAT, constants_frame, write_report
from .sweep import SweepReport, run_sweep, stage, touching_factors

logger = logging.getLogger(__name__)

COEFFICIENT_COLUMNS = ["epsilon", "alpha", "coefficient", "source", "leading", "lower", "upper", "blows_up"]


@dataclass(frozen=True)
class SolveResult:
    u: FieldSolution
    coefficients: CoefficientSolution
    stats: dict
    paths: dict[str, Path]


def run_solve(config: ExperimentConfig) -> SolveResult:
    """The direct solve at the first ε of the configuration."""
    epsilon = config.run.epsilons[0]
    spec = config.domain_spec(epsilon)
    phi = config.boundary_field()
    with stage("mesh"):
        mesh = build_mesh(spec, spec.profile, config.grading)
    with stage("limit"):
        u, coefficients = solve_limit_problem(mesh, config.params, phi)
    directory = config.output.directory
    directory.mkdir(parents=True, exist_ok=True)
    table = pd.DataFrame(
        {
            "alpha": range(1, len(coefficients.X1) + 1),
            "C1": coefficients.C1,
            "C2": coefficients.C2,
            "X1": coefficients.X1,
        }
    )
    paths = {
        "solution": write_solution(u, directory / f"solution_eps{epsilon:.3g}.txt"),
        "coefficients": directory / f"coefficients_eps{epsilon:.3g}.csv",
    }
    table.to_csv(paths["coefficients"], index=False, float_format=FLOAT_FORMAT)
    return SolveResult(u=u, coefficients=coefficients, stats=mesh_statistics(mesh), paths=paths)


def run_factors(config: ExperimentConfig) -> tuple[FactorMatrices, Path]:
    factors = touching_factors(config, config.boundary_field())
    path = write_factors(factors, config.output.directory / config.output.factors)
    return factors, path


def squares_constants(config: ExperimentConfig, factors: FactorMatrices) -> GeometryConstants:
    g = config.geometry
    with stage("geometry-constants"):
        return squares_geometry_constants(
            g.r1, g.r2, g.m, config.r0, config.params, factors.starred, enforce=config.run.enforce_stability
        )


def coefficient_models(
    config: ExperimentConfig, factors: FactorMatrices, geometry_constants: GeometryConstants | None = None
) -> list[AsymptoticModel]:
    profile, params = config.profile, config.params
    if geometry_constants is not None:
        return [model_from_squares(factors, geometry_constants, profile, params, eps) for eps in config.run.epsilons]
    bundle = constants(2, profile.m, profile.tau, params)
    return [model_from_factors(factors, profile, params, eps, bundle) for eps in config.run.epsilons]


def coefficient_frame(models: list[AsymptoticModel]) -> pd.DataFrame:
    rows = []
    for model in models:
        bounds = pointwise_bounds(model)
        for alpha, value in enumerate(model.coefficients, 1):
            rows.append(
                {
                    "epsilon": model.epsilon,
                    "alpha": alpha,
                    "coefficient": value,
                    "source": model.source,
                    "leading": bounds.leading,
                    "lower": bounds.lower,
                    "upper": bounds.upper,
                    "blows_up": bounds.blows_up,
                }
            )
    return pd.DataFrame(rows, columns=COEFFICIENT_COLUMNS)


def run_asymptotic(config: ExperimentConfig) -> tuple[pd.DataFrame, Path]:
    """Leading coefficients at every ε; curvilinear squares use the refined expansion."""
    factors = touching_factors(config, config.boundary_field())
    geometry_constants = squares_constants(config, factors) if config.geometry.shape is Shape.SQUARES else None
    with stage("asymptotic"):
        frame = coefficient_frame(coefficient_models(config, factors, geometry_constants))
    directory = config.output.directory
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "coefficients.csv"
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return frame, path


def run_squares(config: ExperimentConfig, threads: int | None = None) -> tuple[SweepReport, dict[str, Path]]:
    """Touching factors, geometry constants, then the sweep against the refined expansion."""
    if config.geometry.shape is not Shape.SQUARES:
        raise ConfigError(f"the squares pipeline needs shape = squares, got {config.geometry.shape.value}")
    factors = touching_factors(config, config.boundary_field())
    geometry_constants = squares_constants(config, factors)
    logger.info("\n" + constants_frame(geometry_constants).to_string(index=False))
    report = run_sweep(config, threads=threads, factors=factors, geometry_constants=geometry_constants)
    return report, write_report(report)
