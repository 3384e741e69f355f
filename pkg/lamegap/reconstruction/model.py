"""The asymptotic gradient ∇u ≈ Σ_α (C₁^α − C₂^α)∇ū₁^α in the gap, with its O(1)‖φ‖ band."""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from lamegap.asymptotics import BoundaryField, ConstantsBundle, aux_grad_u1
from lamegap.elasticity import LameParameters
from lamegap.errors import ChartError
from lamegap.factors import (
    FactorMatrices,
    GeometryConstants,
    Regime,
    coeff_expansion,
    example_squares_expansion,
    regime_of,
)
from lamegap.fem import CoefficientSolution
from lamegap.geometry import BoundaryTag, GapProfile, Mesh

logger = logging.getLogger(__name__)


class AsymptoticModel(BaseModel):
    """Leading coefficients of C₁^α − C₂^α bound to one gap geometry and one ε."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    profile: GapProfile
    params: LameParameters
    epsilon: float = Field(gt=0, lt=1)
    coefficients: tuple[float, ...]
    regime: Regime
    band: float = Field(0.0, ge=0, description="Magnitude of the bounded O(1)‖φ‖ term")
    source: str = "expansion"
    vanishing: tuple[bool, ...] | None = Field(None, description="Numerator determinants below threshold, per α")

    @model_validator(mode="after")
    def check_consistency(self):
        d = self.profile.d
        if self.params.d != d:
            raise ValueError(f"Lamé parameters are {self.params.d}-dimensional, the profile is {d}-dimensional")
        if len(self.coefficients) != d * (d + 1) // 2:
            raise ValueError(f"expected {d * (d + 1) // 2} coefficients, got {len(self.coefficients)}")
        if self.regime is not regime_of(d, self.profile.m):
            raise ValueError(f"regime {self.regime.value} does not match d={d}, m={self.profile.m}")
        if self.vanishing is not None and len(self.vanishing) != len(self.coefficients):
            raise ValueError("one vanishing flag per coefficient is required")
        return self

    @property
    def d(self) -> int:
        return self.profile.d

    def coefficient(self, alpha: int) -> float:
        return self.coefficients[alpha - 1]

    @property
    def blows_up(self) -> bool:
        """Some coefficient carries a non-vanishing determinant, so |∇u| grows as ε → 0."""
        if self.vanishing is not None:
            return not all(self.vanishing)
        return any(c != 0 for c in self.coefficients)


def _vanishing(factors: FactorMatrices) -> tuple[bool, ...]:
    return tuple(factors.determinants[factors.names(alpha)[0]].singular for alpha in range(1, factors.size + 1))


def model_from_factors(
    factors: FactorMatrices,
    profile: GapProfile,
    params: LameParameters,
    epsilon: float,
    constants: ConstantsBundle,
    band: float = 0.0,
) -> AsymptoticModel:
    d, m = profile.d, profile.m
    coefficients = tuple(
        coeff_expansion(alpha, d, m, profile.sigma, epsilon, factors, constants).value
        for alpha in range(1, factors.size + 1)
    )
    return AsymptoticModel(
        profile=profile,
        params=params,
        epsilon=epsilon,
        coefficients=coefficients,
        regime=factors.regime,
        band=band,
        vanishing=_vanishing(factors),
    )


def model_from_squares(
    factors: FactorMatrices,
    geometry_constants: GeometryConstants,
    profile: GapProfile,
    params: LameParameters,
    epsilon: float,
    band: float = 0.0,
) -> AsymptoticModel:
    """Coefficients with the curvilinear-square geometry constants in their denominators."""
    coefficients = tuple(
        example_squares_expansion(alpha, profile.m, epsilon, geometry_constants, factors)
        for alpha in range(1, factors.size + 1)
    )
    return AsymptoticModel(
        profile=profile,
        params=params,
        epsilon=epsilon,
        coefficients=coefficients,
        regime=factors.regime,
        band=band,
        source="squares",
        vanishing=_vanishing(factors),
    )


def model_from_solution(
    coefficients: CoefficientSolution, profile: GapProfile, params: LameParameters, epsilon: float, band: float = 0.0
) -> AsymptoticModel:
    """The solver's own X¹ plugged into the asymptotic field."""
    return AsymptoticModel(
        profile=profile,
        params=params,
        epsilon=epsilon,
        coefficients=tuple(float(x) for x in coefficients.X1),
        regime=regime_of(profile.d, profile.m),
        band=band,
        source="solver",
    )


def boundary_sup_norm(phi: BoundaryField, mesh: Mesh) -> float:
    """max |φ| over the outer boundary nodes of the mesh."""
    nodes = mesh.nodes[mesh.tagged_nodes(BoundaryTag.OUTER)]
    if len(nodes) == 0:
        raise ValueError("mesh has no outer boundary nodes")
    return float(np.linalg.norm(phi.value(nodes), axis=-1).max())


def check_in_gap(profile: GapProfile, epsilon: float, x, rtol: float = 1e-9) -> np.ndarray:
    """Raise ChartError unless every point lies in Ω_R = {h₂ ≤ x_d ≤ ε + h₁, |x′| < R}."""
    x = np.asarray(x, dtype=float)
    d = profile.d
    if x.shape[-1] != d:
        raise ValueError(f"expected points with {d} coordinates, got shape {x.shape}")
    xp = profile.check_chart(x[..., : d - 1], factor=1.0)
    lower = profile.h2(xp)
    upper = epsilon + profile.h1(xp)
    slack = rtol * (upper - lower)
    xd = x[..., d - 1]
    if np.any(xd < lower - slack) or np.any(xd > upper + slack):
        raise ChartError("point lies outside the gap between the inclusions")
    return x


def asymptotic_gradient(model: AsymptoticModel, x) -> np.ndarray:
    """Σ_α coeff(α)·∇ū₁^α(x); the bounded O(1)‖φ‖ part is left to `model.band`."""
    x = check_in_gap(model.profile, model.epsilon, x)
    total = np.zeros(x.shape + (model.d,))
    for alpha, coefficient in enumerate(model.coefficients, start=1):
        if coefficient != 0:
            total += coefficient * aux_grad_u1(alpha, model.profile, model.epsilon, model.params, x)
    return total
