import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from lamegap.errors import ChartError
from lamegap.fem import CoefficientSolution, FieldSolution, gradient_at
from lamegap.geometry import GapProfile

from .model import AsymptoticModel, asymptotic_gradient

logger = logging.getLogger(__name__)

DEFAULT_PROBE_T = (0.0, 0.25, 0.5, 1.0, 2.0)

METRIC_COLUMNS = [
    "epsilon",
    "alpha",
    "coeff_direct",
    "coeff_asymptotic",
    "rel_err",
    "probe_id",
    "grad_direct_norm",
    "grad_asym_norm",
]


@dataclass(frozen=True)
class Probe:
    probe_id: str
    t: float
    point: np.ndarray


def mid_gap(profile: GapProfile, epsilon: float, x1: float) -> np.ndarray:
    xp = np.array([x1])
    height = 0.5 * (profile.h2(xp) + epsilon + profile.h1(xp))
    return np.array([x1, float(np.squeeze(height))])


def default_probes(profile: GapProfile, epsilon: float, ts=DEFAULT_PROBE_T) -> list[Probe]:
    """Mid-gap points at x₁ = t·ε^{1/m}: the gap centre and the ring where rotations peak."""
    if profile.d != 2:
        raise ValueError("probes are laid out on the plane gap segment")
    scale = epsilon ** (1 / profile.m)
    return [Probe(probe_id=f"t={t:g}", t=float(t), point=mid_gap(profile, epsilon, t * scale)) for t in ts]


@dataclass(frozen=True)
class Comparison:
    epsilon: float
    probes: pd.DataFrame
    coefficients: pd.DataFrame

    @property
    def max_gap_error(self) -> float:
        """Largest pointwise error over the probes, relative to the largest direct gradient."""
        return float(self.probes["abs_err"].max() / self.probes["grad_direct_norm"].max())

    @property
    def max_coefficient_discrepancy(self) -> float:
        if self.coefficients.empty:
            return float("nan")
        return float(self.coefficients["rel_err"].max())

    def metrics(self) -> pd.DataFrame:
        """Rows in the CSV metrics layout: one per α, then one per probe."""
        coefficients = self.coefficients.assign(epsilon=self.epsilon, probe_id=None)
        probes = self.probes.assign(epsilon=self.epsilon, alpha=pd.NA, coeff_direct=np.nan, coeff_asymptotic=np.nan)
        frame = pd.concat([coefficients, probes], ignore_index=True).reindex(columns=METRIC_COLUMNS)
        frame["alpha"] = frame["alpha"].astype("Int64")
        return frame


def _relative(difference, reference):
    reference = np.abs(reference)
    return np.where(reference > 0, np.abs(difference) / np.where(reference > 0, reference, 1.0), np.abs(difference))


def coefficient_discrepancy(solution: CoefficientSolution, model: AsymptoticModel) -> pd.DataFrame:
    """X¹_α from the solver against the model's C₁^α − C₂^α; absolute where X¹_α vanishes."""
    direct = np.asarray(solution.X1, dtype=float)
    predicted = np.asarray(model.coefficients, dtype=float)
    if direct.shape != predicted.shape:
        raise ValueError(f"{len(direct)} solver coefficients against {len(predicted)} model coefficients")
    return pd.DataFrame(
        {
            "alpha": np.arange(1, len(direct) + 1),
            "coeff_direct": direct,
            "coeff_asymptotic": predicted,
            "rel_err": _relative(direct - predicted, direct),
        }
    )


def compare(
    direct: FieldSolution,
    model: AsymptoticModel,
    probes: list[Probe] | None = None,
    coefficients: CoefficientSolution | None = None,
) -> Comparison:
    if not np.isclose(direct.epsilon, model.epsilon, rtol=1e-12, atol=0):
        raise ValueError(f"direct solution is at epsilon={direct.epsilon}, the model at {model.epsilon}")
    probes = default_probes(model.profile, model.epsilon) if probes is None else probes
    if not probes:
        raise ValueError("at least one probe is required")
    points = np.array([probe.point for probe in probes])
    try:
        asym = asymptotic_gradient(model, points)
        exact = gradient_at(direct, points)
    except ChartError as exc:
        raise ChartError(f"probe outside the gap or the mesh: {exc}") from exc
    difference = np.linalg.norm(exact - asym, axis=(-2, -1))
    direct_norm = np.linalg.norm(exact, axis=(-2, -1))
    frame = pd.DataFrame(
        {
            "probe_id": [probe.probe_id for probe in probes],
            "t": [probe.t for probe in probes],
            "x1": points[:, 0],
            "x2": points[:, 1],
            "grad_direct_norm": direct_norm,
            "grad_asym_norm": np.linalg.norm(asym, axis=(-2, -1)),
            "abs_err": difference,
            "rel_err": _relative(difference, direct_norm),
            "within_band": difference <= model.band,
        }
    )
    table = (
        coefficient_discrepancy(coefficients, model)
        if coefficients is not None
        else pd.DataFrame(columns=["alpha", "coeff_direct", "coeff_asymptotic", "rel_err"])
    )
    comparison = Comparison(epsilon=model.epsilon, probes=frame, coefficients=table)
    logger.info(
        f"epsilon={model.epsilon:g}: max-gap error {comparison.max_gap_error:.3e}, "
        f"coefficient discrepancy {comparison.max_coefficient_discrepancy:.3e}"
    )
    return comparison


@dataclass(frozen=True)
class PointwiseBounds:
    epsilon: float
    leading: float
    lower: float
    upper: float
    blows_up: bool


def pointwise_bounds(model: AsymptoticModel, epsilon: float | None = None) -> PointwiseBounds:
    """|Σ coeff·∇ū₁^α| at the gap centre, widened by ± the model's band."""
    if epsilon is not None and not np.isclose(epsilon, model.epsilon, rtol=1e-12, atol=0):
        raise ValueError(f"model coefficients belong to epsilon={model.epsilon}, not {epsilon}")
    profile, origin = model.profile, np.zeros((1, model.d - 1))
    centre = np.zeros(model.d)
    centre[-1] = 0.5 * float(np.squeeze(profile.h2(origin) + model.epsilon + profile.h1(origin)))
    leading = float(np.linalg.norm(asymptotic_gradient(model, centre)))
    return PointwiseBounds(
        epsilon=model.epsilon,
        leading=leading,
        lower=max(leading - model.band, 0.0),
        upper=leading + model.band,
        blows_up=model.blows_up,
    )
