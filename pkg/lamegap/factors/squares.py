"""Geometry constants of curvilinear squares and the refined coefficient expansions.

For the squares |x₁|^m + |x₂ − c|^m = r^m the principal energies behave like

    a₁₁^{αα} = 𝓛^α 𝓜ᵢ ρᵢ + 𝒦*ₘ^α + o(1),

and 𝒦*ₘ^α is split into a touching-configuration energy with its divergent part removed,
the profile correction C*, and a tail term in closed form. The length r₀ separating the
near field from the rest drops out of the sum identically: r0_change only measures the
one-dimensional quadratures, while eta_change measures the finite-element part.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad
from scipy.special import binom

from lamegap.asymptotics import constants
from lamegap.asymptotics.constants import is_critical
from lamegap.elasticity import LameParameters
from lamegap.errors import InstabilityError, RegimeError
from lamegap.geometry import squares_tau

from .cusp import gap_weight_power
from .matrices import FactorMatrices
from .starred import Regime, StarredQuantities, regime_of, relative_change

logger = logging.getLogger(__name__)

SERIES_TERMS = 24
SERIES_SWITCH = 0.1


def tail_term(alpha: int, m: float, r0: float, tau0: float, lame: float) -> float:
    """Closed-form contribution of |x₁| > r₀ to 𝒦*ₘ^α."""
    if gap_weight_power(alpha) == 0:
        return -2 * r0 ** (1 - m) * lame / (tau0 * (m - 1))
    if is_critical(m, 3):
        return 2 * (math.log(tau0) + 3 * math.log(r0)) * lame / (3 * tau0)
    if m > 3:
        return 2 * r0 ** (3 - m) * lame / (tau0 * (3 - m))
    raise RegimeError(f"the rotational geometry constant needs m >= 3, got m = {m}", stage="geometry-constants")


def _cap_deficit(t: np.ndarray, m: float) -> np.ndarray:
    """(1 − t)^{1/m} − 1 + t/m, by its binomial series for small t."""
    t = np.asarray(t, dtype=float)
    direct = (1 - t) ** (1 / m) - 1 + t / m
    k = np.arange(2, SERIES_TERMS + 2)
    series = np.sum(binom(1 / m, k) * (-t[..., None]) ** k, axis=-1)
    return np.where(t < SERIES_SWITCH, series, direct)


def squares_gap(r1: float, r2: float, m: float, x) -> np.ndarray:
    """h₁ − h₂ of the touching squares."""
    r = np.abs(np.asarray(x, dtype=float))
    return sum(-radius * np.expm1(np.log1p(-((r / radius) ** m)) / m) for radius in (r1, r2))


def profile_correction(r1: float, r2: float, m: float, r0: float, alpha: int) -> float:
    """C* = ∫_{|x₁|<r₀} w(x₁)[1/(h₁−h₂) − 1/(τ₀|x₁|^m)] dx₁ with w = 1 or x₁²."""
    if not 0 < r0 < min(r1, r2):
        raise ValueError(f"r0 must lie in (0, min(r1, r2)), got {r0}")
    power = gap_weight_power(alpha)
    tau0 = squares_tau(r1, r2, m)

    def integrand(x):
        # τ₀x^m − (h₁−h₂) without cancellation
        deficit = sum(radius * _cap_deficit((x / radius) ** m, m) for radius in (r1, r2))
        return x**power * deficit / (squares_gap(r1, r2, m, x) * tau0 * x**m)

    value, _ = quad(integrand, 0.0, r0, epsabs=1e-13, epsrel=1e-11, limit=200)
    return 2 * value


def _weighted_gap_integral(r1: float, r2: float, m: float, a: float, b: float, alpha: int) -> float:
    power = gap_weight_power(alpha)
    value, _ = quad(lambda x: x**power / squares_gap(r1, r2, m, x), a, b, epsabs=1e-13, epsrel=1e-11, limit=200)
    return 2 * value


def gap_integral(r1: float, r2: float, m: float, eta: float, r0: float, alpha: int) -> float:
    """∫_{η<|x₁|<r₀} w(x₁)/(h₁−h₂) dx₁."""
    if not 0 < eta < r0:
        raise ValueError(f"need 0 < eta < r0, got eta={eta}, r0={r0}")
    return _weighted_gap_integral(r1, r2, m, eta, r0, alpha)


class GeometryConstants(BaseModel):
    """𝒦*ₘ^α and 𝒢*ₘ^α for α = 1..3; rotational entries are None when m < 3."""

    model_config = ConfigDict(frozen=True)

    m: float = Field(ge=2)
    r1: float = Field(gt=0)
    r2: float = Field(gt=0)
    r0: float = Field(gt=0)
    tau0: float = Field(gt=0)
    eta: float = Field(gt=0)
    lame: tuple[float, float, float]
    M0: float
    M2: float | None = None
    K: tuple[float | None, float | None, float | None]
    G: tuple[float | None, float | None, float | None]
    M_star: tuple[float | None, float | None, float | None] = Field(description="Truncated energy minus its gap part")
    M_tilde: tuple[float | None, float | None, float | None] = Field(description="M* + 𝓛C*")
    C_star: tuple[float | None, float | None, float | None]
    eta_change: tuple[float | None, float | None, float | None]
    r0_change: tuple[float | None, float | None, float | None]

    def require_G(self, alpha: int) -> float:
        value = self.G[alpha - 1]
        if value is None:
            raise RegimeError(f"G*^{alpha} is not defined for m = {self.m}", stage="geometry-constants")
        return value


def _constant_at(
    alpha: int, starred: StarredQuantities, r1: float, r2: float, r0: float, lame: float, half: bool
) -> tuple[float, float, float, float]:
    m = starred.m
    eta = starred.eta / 2 if half else starred.eta
    tau0 = squares_tau(r1, r2, m)
    regular = starred.regular_diagonal(alpha, half=half)
    if regular is not None:
        # the split-off part covers η < |x₁| < R; move its upper end to r₀
        M_star = regular + lame * _weighted_gap_integral(r1, r2, m, r0, starred.window, alpha)
    else:
        M_star = starred.raw_diagonal(alpha, half=half) - lame * gap_integral(r1, r2, m, eta, r0, alpha)
    C_star = profile_correction(r1, r2, m, r0, alpha)
    M_tilde = M_star + lame * C_star
    return M_tilde + tail_term(alpha, m, r0, tau0, lame), M_star, M_tilde, C_star


def squares_geometry_constants(
    r1: float,
    r2: float,
    m: float,
    r0: float,
    params: LameParameters,
    starred: StarredQuantities,
    r0_tolerance: float = 0.02,
    eta_tolerance: float = 0.05,
    enforce: bool = False,
) -> GeometryConstants:
    """𝒦*ₘ^α = M̃*^α + tail, from the touching energies on Ω* truncated at η and η/2.

    The η/2 values are reported; the change against η and against r₀/2 is kept alongside.
    """
    if params.d != 2 or starred.d != 2:
        raise ValueError("the curvilinear squares pipeline is planar (d = 2)")
    if not math.isclose(starred.m, m):
        raise ValueError(f"starred quantities were computed for m = {starred.m}, not {m}")
    if not starred.eta < r0 / 2:
        raise ValueError(f"r0/2 = {r0 / 2} must exceed the cusp cutoff eta = {starred.eta}")
    tau0 = squares_tau(r1, r2, m)
    bundle = constants(2, m, tau0, params)
    fields = {key: [None, None, None] for key in ("K", "G", "M_star", "M_tilde", "C_star", "eta_change", "r0_change")}
    problems = []
    for alpha in (1, 2, 3):
        if alpha == 3 and m < 3 and not is_critical(m, 3):
            continue
        lame = bundle.lame(alpha)
        K, M_star, M_tilde, C_star = _constant_at(alpha, starred, r1, r2, r0, lame, half=True)
        K_coarse, *_ = _constant_at(alpha, starred, r1, r2, r0, lame, half=False)
        K_short, *_ = _constant_at(alpha, starred, r1, r2, r0 / 2, lame, half=True)
        scale = lame * bundle.require(0 if alpha <= 2 else 2)
        eta_change = float(relative_change(K_coarse, K, atol=1e-12 * scale))
        r0_change = float(relative_change(K_short, K, atol=1e-12 * scale))
        for key, value in zip(fields, (K, K / scale, M_star, M_tilde, C_star, eta_change, r0_change), strict=True):
            fields[key][alpha - 1] = float(value)
        if eta_change > eta_tolerance:
            problems.append(f"K*^{alpha} changes by {eta_change:.2%} between eta and eta/2")
        if r0_change > r0_tolerance:
            problems.append(f"K*^{alpha} changes by {r0_change:.2%} between r0 and r0/2")
        logger.info(f"K*_{m:g}^{alpha} = {K:.6g}, G* = {K / scale:.6g} (eta change {eta_change:.2e})")
    for problem in problems:
        if enforce:
            raise InstabilityError(problem, stage="geometry-constants")
        logger.warning(problem)
    return GeometryConstants(
        m=m,
        r1=r1,
        r2=r2,
        r0=r0,
        tau0=tau0,
        eta=starred.eta,
        lame=bundle.L,
        M0=bundle.require(0),
        M2=bundle.M2,
        **{key: tuple(value) for key, value in fields.items()},
    )


def example_squares_expansion(
    alpha: int, m: float, epsilon: float, geometry_constants: GeometryConstants, factors: FactorMatrices
) -> float:
    """Refined value of C₁^α − C₂^α for curvilinear squares, with 𝒢* in the denominator."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not math.isclose(geometry_constants.m, m) or factors.regime is not regime_of(2, m) or factors.d != 2:
        raise RegimeError(
            f"constants (m={geometry_constants.m}) and factors ({factors.regime.value}) do not match m = {m}",
            stage="squares",
        )
    gc = geometry_constants
    lame = gc.lame[alpha - 1]
    if alpha <= 2:
        scale = epsilon ** ((m - 1) / m)
        return factors.ratio(alpha) * scale / (lame * gc.M0) / (1 + gc.require_G(alpha) * scale)
    if factors.regime is Regime.MIDDLE:
        return factors.ratio(alpha)
    if is_critical(m, 3):
        return factors.ratio(alpha) / (lame * gc.M2) / (abs(math.log(epsilon)) + gc.require_G(alpha))
    scale = epsilon ** ((m - 3) / m)
    return factors.ratio(alpha) * scale / (lame * gc.M2) / (1 + gc.require_G(alpha) * scale)


def strict_convex_geometry_constant(kappa1: float, kappa2: float, R: float, lame: float, M3: float) -> float:
    """𝒢* of two strictly convex 3D inclusions with principal curvatures κ₁, κ₂ at the contact."""
    if kappa1 <= 0 or kappa2 <= 0 or R <= 0:
        raise ValueError("curvatures and R must be positive")

    def integrand(theta):
        return math.log(math.cos(theta) ** 2 / kappa1 + math.sin(theta) ** 2 / kappa2)

    angular, _ = quad(integrand, 0.0, math.pi / 2)
    return 2 * math.log(R) - 2 / math.pi * angular + math.sqrt(kappa1 * kappa2) / (math.pi * lame) * M3


def strict_convex_expansion(
    ratio: float, kappa1: float, kappa2: float, lame: float, epsilon: float, geometry_constant: float
) -> float:
    """det𝔽₁*/det𝔽₀* · √(κ₁κ₂)/(π𝓛(|ln ε| + 𝒢*))."""
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return ratio * math.sqrt(kappa1 * kappa2) / (math.pi * lame * (abs(math.log(epsilon)) + geometry_constant))
