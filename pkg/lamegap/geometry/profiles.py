"""Gap profiles h₁, h₂ describing the inclusion boundaries near the closest point.

Points of the chart are written x = (x′, x_d). Every profile method takes `xp` with a
trailing axis of length d − 1; for d = 2 a bare coordinate array is accepted too.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from lamegap.errors import ChartError

logger = logging.getLogger(__name__)


def as_prime(xp, d: int) -> np.ndarray:
    xp = np.asarray(xp, dtype=float)
    if d == 2 and (xp.ndim == 0 or xp.shape[-1] != 1):
        xp = xp[..., None]
    if xp.shape[-1] != d - 1:
        raise ValueError(f"expected trailing dimension {d - 1}, got shape {xp.shape}")
    return xp


class GapProfile(BaseModel, ABC):
    """Upper boundary x_d = ε + h₁(x′) and lower boundary x_d = h₂(x′) over |x′| ≤ 2R.

    h₁ − h₂ = τ|x′|^m + O(|x′|^{m+σ}); κ₁ bounds |∇ʲhᵢ|/|x′|^{m−j} and κ₂ the C² norms.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    d: int = Field(2, ge=2)
    m: float = Field(ge=2)
    tau: float = Field(gt=0)
    sigma: float = Field(gt=0)
    R: float = Field(gt=0, description="Gap half-width; the chart is |x'| <= 2R")
    kappa1: float = Field(1.0, gt=0)
    kappa2: float = Field(1.0, gt=0)

    def check_chart(self, xp, factor: float = 2.0) -> np.ndarray:
        xp = as_prime(xp, self.d)
        radius = np.linalg.norm(xp, axis=-1)
        limit = factor * self.R
        if np.any(radius > limit * (1 + 1e-12)):
            raise ChartError(f"|x'| = {float(np.max(radius)):.6g} lies outside the chart of radius {limit:.6g}")
        return xp

    @abstractmethod
    def h1(self, xp) -> np.ndarray: ...

    @abstractmethod
    def h2(self, xp) -> np.ndarray: ...

    @abstractmethod
    def grad_h1(self, xp) -> np.ndarray: ...

    @abstractmethod
    def grad_h2(self, xp) -> np.ndarray: ...

    @abstractmethod
    def hess_h1(self, xp) -> np.ndarray: ...

    @abstractmethod
    def hess_h2(self, xp) -> np.ndarray: ...

    def gap(self, xp) -> np.ndarray:
        return self.h1(xp) - self.h2(xp)

    def grad_gap(self, xp) -> np.ndarray:
        return self.grad_h1(xp) - self.grad_h2(xp)

    def hess_gap(self, xp) -> np.ndarray:
        return self.hess_h1(xp) - self.hess_h2(xp)

    @property
    def has_derivatives(self) -> bool:
        return True


class RadialProfile(GapProfile):
    """Profiles depending on x′ through r = |x′| only."""

    @abstractmethod
    def radial_value(self, i: int, r: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def radial_slope_over_r(self, i: int, r: np.ndarray) -> np.ndarray:
        """h′ᵢ(r)/r, finite at r = 0."""

    @abstractmethod
    def radial_curvature(self, i: int, r: np.ndarray) -> np.ndarray:
        """h″ᵢ(r)."""

    def _radius(self, xp) -> tuple[np.ndarray, np.ndarray]:
        xp = as_prime(xp, self.d)
        return xp, np.linalg.norm(xp, axis=-1)

    def _value(self, i, xp):
        _, r = self._radius(xp)
        return self.radial_value(i, r)

    def _grad(self, i, xp):
        xp, r = self._radius(xp)
        return self.radial_slope_over_r(i, r)[..., None] * xp

    def _hess(self, i, xp):
        xp, r = self._radius(xp)
        slope = self.radial_slope_over_r(i, r)
        curvature = self.radial_curvature(i, r)
        r2 = r**2
        ratio = np.divide(curvature - slope, r2, out=np.zeros_like(r2), where=r2 > 0)
        eye = np.eye(self.d - 1)
        return slope[..., None, None] * eye + ratio[..., None, None] * np.einsum("...i,...j->...ij", xp, xp)

    def h1(self, xp):
        return self._value(1, xp)

    def h2(self, xp):
        return self._value(2, xp)

    def grad_h1(self, xp):
        return self._grad(1, xp)

    def grad_h2(self, xp):
        return self._grad(2, xp)

    def hess_h1(self, xp):
        return self._hess(1, xp)

    def hess_h2(self, xp):
        return self._hess(2, xp)

    def estimate_kappas(self, n_samples: int = 257) -> tuple[float, float]:
        """Sampled bounds (κ₁, κ₂) over 0 < r ≤ 2R."""
        r = np.linspace(0, 2 * self.R, n_samples)[1:]
        kappa1 = 0.0
        kappa2 = 0.0
        for i in (1, 2):
            slope = self.radial_slope_over_r(i, r) * r
            curvature = self.radial_curvature(i, r)
            kappa1 = max(
                kappa1,
                float(np.max(np.abs(slope) / r ** (self.m - 1))),
                float(np.max(np.abs(curvature) / r ** (self.m - 2))),
            )
            kappa2 += float(
                np.max(np.abs(self.radial_value(i, r))) + np.max(np.abs(slope)) + np.max(np.abs(curvature))
            )
        return kappa1, kappa2


class PowerProfile(RadialProfile):
    """h₁ = s·τ|x′|^m and h₂ = −(1 − s)·τ|x′|^m exactly; σ = ∞."""

    split: float = Field(0.5, ge=0, le=1)
    sigma: float = Field(math.inf, gt=0)

    def _coefficient(self, i: int) -> float:
        return self.split * self.tau if i == 1 else -(1 - self.split) * self.tau

    def radial_value(self, i, r):
        return self._coefficient(i) * np.asarray(r, dtype=float) ** self.m

    def radial_slope_over_r(self, i, r):
        return self._coefficient(i) * self.m * np.asarray(r, dtype=float) ** (self.m - 2)

    def radial_curvature(self, i, r):
        return self._coefficient(i) * self.m * (self.m - 1) * np.asarray(r, dtype=float) ** (self.m - 2)


class CurvilinearSquareProfile(RadialProfile):
    """Profiles of |x₁|^m + |x₂ − ε − r₁|^m = r₁^m (upper) and |x₁|^m + |x₂ + r₂|^m = r₂^m (lower).

    m = 2 gives two disks.
    """

    r1: float = Field(gt=0)
    r2: float = Field(gt=0)

    @model_validator(mode="after")
    def check_chart_fits(self):
        if self.d != 2:
            raise ValueError("curvilinear squares are planar shapes (d = 2)")
        if 2 * self.R >= min(self.r1, self.r2):
            raise ValueError(f"chart 2R = {2 * self.R} must stay inside both radii ({self.r1}, {self.r2})")
        return self

    def _radius_of(self, i: int) -> float:
        return self.r1 if i == 1 else self.r2

    def _sign(self, i: int) -> float:
        return 1.0 if i == 1 else -1.0

    def _cap(self, i, r):
        # r_i - (r_i^m - r^m)^{1/m}, without cancellation at small r
        radius = self._radius_of(i)
        ratio = (np.asarray(r, dtype=float) / radius) ** self.m
        return -radius * np.expm1(np.log1p(-ratio) / self.m)

    def _g(self, i, r):
        radius = self._radius_of(i)
        return (radius**self.m - np.asarray(r, dtype=float) ** self.m) ** (1 / self.m)

    def radial_value(self, i, r):
        return self._sign(i) * self._cap(i, r)

    def radial_slope_over_r(self, i, r):
        r = np.asarray(r, dtype=float)
        return self._sign(i) * r ** (self.m - 2) * self._g(i, r) ** (1 - self.m)

    def radial_curvature(self, i, r):
        r = np.asarray(r, dtype=float)
        g = self._g(i, r)
        m = self.m
        return self._sign(i) * ((m - 1) * r ** (m - 2) * g ** (1 - m) + (m - 1) * r ** (2 * m - 2) * g ** (1 - 2 * m))


class CallableProfile(GapProfile):
    """User-supplied profile. κ₁, κ₂ are taken as given and never validated."""

    h1_fn: Callable
    h2_fn: Callable
    grad_h1_fn: Callable | None = None
    grad_h2_fn: Callable | None = None
    hess_h1_fn: Callable | None = None
    hess_h2_fn: Callable | None = None

    @property
    def has_derivatives(self) -> bool:
        return None not in (self.grad_h1_fn, self.grad_h2_fn, self.hess_h1_fn, self.hess_h2_fn)

    def _call(self, fn: Callable | None, name: str, xp):
        if fn is None:
            raise ValueError(f"profile has no analytic {name}; supply it to use the correction fields")
        return np.asarray(fn(as_prime(xp, self.d)), dtype=float)

    def h1(self, xp):
        return self._call(self.h1_fn, "h1", xp)

    def h2(self, xp):
        return self._call(self.h2_fn, "h2", xp)

    def grad_h1(self, xp):
        return self._call(self.grad_h1_fn, "gradient of h1", xp)

    def grad_h2(self, xp):
        return self._call(self.grad_h2_fn, "gradient of h2", xp)

    def hess_h1(self, xp):
        return self._call(self.hess_h1_fn, "Hessian of h1", xp)

    def hess_h2(self, xp):
        return self._call(self.hess_h2_fn, "Hessian of h2", xp)


def squares_tau(r1: float, r2: float, m: float) -> float:
    """τ₀ = (r₁^{1−m} + r₂^{1−m})/m."""
    return (r1 ** (1 - m) + r2 ** (1 - m)) / m


def default_window(r1: float, r2: float) -> float:
    return 0.4 * min(r1, r2)


def curvilinear_square_profile(r1: float, r2: float, m: float, R: float | None = None) -> CurvilinearSquareProfile:
    if r1 <= 0 or r2 <= 0:
        raise ValueError(f"radii must be positive, got r1={r1}, r2={r2}")
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    R = default_window(r1, r2) if R is None else R
    profile = CurvilinearSquareProfile(r1=r1, r2=r2, m=m, tau=squares_tau(r1, r2, m), sigma=m, R=R)
    kappa1, kappa2 = profile.estimate_kappas()
    return profile.model_copy(update={"kappa1": kappa1, "kappa2": kappa2})


def power_profile(tau: float, m: float, R: float, split: float = 0.5, d: int = 2) -> PowerProfile:
    profile = PowerProfile(d=d, tau=tau, m=m, R=R, split=split)
    kappa1, kappa2 = profile.estimate_kappas()
    return profile.model_copy(update={"kappa1": kappa1, "kappa2": kappa2})


def delta(profile: GapProfile, epsilon: float, xprime) -> np.ndarray:
    """δ(x′) = ε + h₁(x′) − h₂(x′) on the chart |x′| ≤ 2R."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    xp = profile.check_chart(xprime)
    return epsilon + profile.gap(xp)


@dataclass(frozen=True)
class GapRegion:
    """Characteristic predicate of Ω_t(z′) = {h₂(x′) < x_d < ε + h₁(x′), |x′ − z′| < t}."""

    profile: GapProfile
    epsilon: float
    z_prime: np.ndarray
    t: float

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.profile.d
        if x.shape[-1] != d:
            raise ValueError(f"expected points with {d} coordinates, got shape {x.shape}")
        xp = x[..., : d - 1]
        near = np.linalg.norm(xp - self.z_prime, axis=-1) < self.t
        inside = np.zeros(near.shape, dtype=bool)
        if np.any(near):
            xp_near = xp[near]
            xd = x[..., d - 1][near]
            inside[near] = (self.profile.h2(xp_near) < xd) & (xd < self.epsilon + self.profile.h1(xp_near))
        return inside


def omega_t(profile: GapProfile, epsilon: float, z_prime, t: float) -> GapRegion:
    z_prime = as_prime(z_prime, profile.d)
    if z_prime.ndim != 1:
        raise ValueError("z_prime must be a single point")
    if np.linalg.norm(z_prime) > profile.R * (1 + 1e-12):
        raise ChartError(f"|z'| must not exceed R = {profile.R}")
    if not 0 < t <= 2 * profile.R:
        raise ChartError(f"t must lie in (0, 2R] = (0, {2 * profile.R}], got {t}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    return GapRegion(profile=profile, epsilon=epsilon, z_prime=z_prime, t=t)
