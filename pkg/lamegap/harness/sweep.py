import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import tqdm
from numpy.linalg import LinAlgError

from lamegap.asymptotics import (
    BoundaryField,
    Location,
    b_convergence_exponent,
    constants,
    energy_exponent,
    predicted_exponent,
)
from lamegap.elasticity import rigid_basis
from lamegap.errors import ChartError, NumericalError
from lamegap.factors import FactorMatrices, GeometryConstants, assemble_matrices, starred_quantities
from lamegap.fem import cell_gradients, gradient_at, solve_limit_problem, solve_subproblems
from lamegap.geometry import build_mesh
from lamegap.reconstruction import (
    Comparison,
    boundary_sup_norm,
    compare,
    default_probes,
    mid_gap,
    model_from_factors,
    model_from_solution,
    model_from_squares,
)
from lamegap.utils import resolve_threads

from .config import ExperimentConfig, Preset
from .rates import RateFit, fit_rate

logger = logging.getLogger(__name__)

FIT_TOLERANCE = 0.15

FIT_COLUMNS = ["quantity", "exponent", "half_width", "predicted", "samples", "decades", "agrees"]


@contextmanager
def stage(name: str):
    """Tag failures of a pipeline stage so the CLI can name it."""
    try:
        yield
    except NumericalError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    except (ChartError, LinAlgError, FloatingPointError) as exc:
        raise NumericalError(str(exc), stage=name) from exc


@dataclass(frozen=True)
class EpsilonResult:
    epsilon: float
    comparison: Comparison
    quantities: dict[str, float]


def gap_cells(mesh) -> np.ndarray:
    return np.flatnonzero(mesh.gap_nodes[mesh.triangles].all(axis=1))


def gap_decay(subproblems, alpha: int, point) -> float:
    """|∇(v₁^α + v₂^α) − ∇ψ_α| / |∇v₁^α| at a point of the gap; NaN where ∇v₁^α vanishes."""
    first = gradient_at(subproblems.field(1, alpha), point)
    second = gradient_at(subproblems.field(2, alpha), point)
    scale = np.linalg.norm(first)
    leak = np.linalg.norm(first + second - rigid_basis(2).gradient(alpha))
    return float(leak / scale) if scale > 0 else math.nan


@dataclass
class SweepRunner:
    config: ExperimentConfig
    phi: BoundaryField
    factors: FactorMatrices | None = None
    geometry_constants: GeometryConstants | None = None
    threads: int = 1

    def perform(self) -> list[EpsilonResult]:
        epsilons = list(self.config.run.epsilons)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            futures = {pool.submit(self.__call__, epsilon): k for k, epsilon in enumerate(epsilons)}

            progress_bar = tqdm.tqdm(
                total=len(futures),
                desc="Solving gaps",
                unit="eps",
                file=sys.stdout,
                dynamic_ncols=True,
                position=0,
                leave=True,
            )

            results = [None] * len(epsilons)
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                progress_bar.update(1)

            progress_bar.close()

        return results

    def model(self, coefficients, profile, epsilon: float, band: float):
        params = self.config.params
        if self.geometry_constants is not None and self.factors is not None:
            return model_from_squares(self.factors, self.geometry_constants, profile, params, epsilon, band=band)
        if self.factors is not None:
            bundle = constants(2, profile.m, profile.tau, params)
            return model_from_factors(self.factors, profile, params, epsilon, bundle, band=band)
        return model_from_solution(coefficients, profile, params, epsilon, band=band)

    def __call__(self, epsilon: float) -> EpsilonResult:
        config, params = self.config, self.config.params
        spec = config.domain_spec(epsilon)
        profile = spec.profile
        with stage("mesh"):
            mesh = build_mesh(spec, profile, config.grading)
        with stage("subproblems"):
            subproblems = solve_subproblems(mesh, params, self.phi)
        with stage("limit"):
            u, coefficients = solve_limit_problem(mesh, params, self.phi, subproblems=subproblems)
        with stage("reconstruction"):
            band = config.probes.band * boundary_sup_norm(self.phi, mesh)
            model = self.model(coefficients, profile, epsilon, band)
            probes = [
                probe
                for probe in default_probes(profile, epsilon, config.probes.t)
                if abs(probe.point[0]) <= profile.R
            ]
            comparison = compare(u, model, probes, coefficients)
        with stage("metrics"):
            quantities = self.quantities(epsilon, mesh, profile, subproblems, u, coefficients)
        quantities["max_gap_error"] = comparison.max_gap_error
        quantities["coeff_rel_err"] = comparison.max_coefficient_discrepancy
        logger.info(f"epsilon={epsilon:g}: max gap |grad u| {quantities['max_gap_grad']:.4e}")
        return EpsilonResult(epsilon=epsilon, comparison=comparison, quantities=quantities)

    def quantities(self, epsilon, mesh, profile, subproblems, u, coefficients) -> dict[str, float]:
        cells = gap_cells(mesh)
        if len(cells) == 0:
            raise NumericalError(f"no cell lies in the gap at epsilon={epsilon:g}")
        grads = cell_gradients(u, cells=cells)
        centre = mid_gap(profile, epsilon, 0.0)
        D = coefficients.blocks.D
        ring = mid_gap(profile, epsilon, epsilon ** (1 / profile.m))
        values = {
            "epsilon": epsilon,
            "max_gap_grad": float(np.linalg.norm(grads, axis=(-2, -1)).max()),
            "grad_center": float(np.linalg.norm(gradient_at(u, centre))),
            "grad_ring": float(np.linalg.norm(gradient_at(u, ring))),
            "condition": coefficients.condition,
            "d_min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (D + D.T)).min()),
        }
        boundary = self.config.boundary
        values["rigid_error"] = math.nan
        basis = rigid_basis(2)
        if boundary.preset is Preset.RIGID:
            exact = basis.gradient(boundary.alpha)
            values["rigid_error"] = float(np.linalg.norm(grads - exact, axis=(-2, -1)).max())
        energy, b = subproblems.energy_table, subproblems.b_table
        for alpha in range(1, subproblems.size + 1):
            values[f"a11_{alpha}"] = float(energy[0, 0, alpha - 1, alpha - 1])
            values[f"b1_{alpha}"] = float(b[0, alpha - 1])
            if self.factors is not None and self.factors.starred is not None:
                starred_b = float(self.factors.starred.b_half[0, alpha - 1])
                values[f"b_diff_{alpha}"] = abs(values[f"b1_{alpha}"] - starred_b)
            values[f"decay_{alpha}"] = gap_decay(subproblems, alpha, centre)
        return values


@dataclass(frozen=True)
class SweepReport:
    config: ExperimentConfig
    results: list[EpsilonResult]
    fits: pd.DataFrame
    factors: FactorMatrices | None = None
    geometry_constants: GeometryConstants | None = None
    rate_fits: dict[str, RateFit] = field(default_factory=dict)

    @property
    def metrics(self) -> pd.DataFrame:
        return pd.concat([result.comparison.metrics() for result in self.results], ignore_index=True)

    @property
    def quantities(self) -> pd.DataFrame:
        return pd.DataFrame([result.quantities for result in self.results])

    @property
    def coefficients_converge(self) -> bool | None:
        """Whether the solver-vs-model coefficient discrepancy shrinks with ε on every step."""
        errors = self.quantities["coeff_rel_err"].to_numpy()
        if len(errors) < 2 or np.isnan(errors).any():
            return None
        return bool(np.all(np.diff(errors) < 0))


def predicted_exponents(m: float, with_b: bool) -> dict[str, float]:
    """Expected power of ε for every fitted series, derived from the rate formulas."""
    predicted = {
        "max_gap_grad": predicted_exponent(2, m, Location.RING),
        "grad_center": predicted_exponent(2, m, Location.CENTER),
        "grad_ring": predicted_exponent(2, m, Location.RING),
    }
    N = rigid_basis(2).size
    predicted |= {f"a11_{alpha}": energy_exponent(alpha, 2, m) for alpha in range(1, N + 1)}
    if with_b:
        predicted |= {f"b_diff_{alpha}": b_convergence_exponent(m) for alpha in range(1, N + 1)}
    return predicted


def fit_quantities(quantities: pd.DataFrame, predicted: dict[str, float]) -> tuple[pd.DataFrame, dict[str, RateFit]]:
    rows, fits = [], {}
    for name, exponent in predicted.items():
        if name not in quantities:
            continue
        values = quantities[name].to_numpy(dtype=float)
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            logger.warning(f"skipping the rate fit of {name}: non-positive or missing values")
            continue
        try:
            fit = fit_rate(quantities["epsilon"], values)
        except ValueError as exc:
            logger.warning(f"skipping the rate fit of {name}: {exc}")
            continue
        fits[name] = fit
        rows.append(
            {
                "quantity": name,
                "exponent": fit.exponent,
                "half_width": fit.half_width,
                "predicted": exponent,
                "samples": len(fit.epsilons),
                "decades": fit.decades,
                "agrees": fit.agrees_with(exponent, FIT_TOLERANCE),
            }
        )
    return pd.DataFrame(rows, columns=FIT_COLUMNS), fits


def touching_factors(config: ExperimentConfig, phi: BoundaryField) -> FactorMatrices:
    with stage("starred"):
        starred = starred_quantities(
            config.domain_spec(config.run.epsilons[0]),
            config.params,
            phi,
            eta=config.run.eta,
            grading=config.grading,
            enforce=config.run.enforce_stability,
        )
    with stage("factors"):
        return assemble_matrices(starred)


def run_sweep(
    config: ExperimentConfig,
    threads: int | None = None,
    factors: FactorMatrices | None = None,
    geometry_constants: GeometryConstants | None = None,
) -> SweepReport:
    """Solve at every ε, compare against the asymptotic model and fit the rates."""
    phi = config.boundary_field()
    if factors is None and config.run.factors:
        factors = touching_factors(config, phi)
    runner = SweepRunner(
        config=config,
        phi=phi,
        factors=factors,
        geometry_constants=geometry_constants,
        threads=resolve_threads(threads if threads is not None else config.run.threads),
    )
    results = runner.perform()
    quantities = pd.DataFrame([result.quantities for result in results])
    fits, rate_fits = fit_quantities(quantities, predicted_exponents(config.geometry.m, factors is not None))
    logger.info(f"sweep over {len(results)} epsilons done, {len(fits)} rate fits")
    return SweepReport(
        config=config,
        results=results,
        fits=fits,
        factors=factors,
        geometry_constants=geometry_constants,
        rate_fits=rate_fits,
    )
