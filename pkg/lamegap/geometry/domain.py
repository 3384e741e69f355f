import logging
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .profiles import CurvilinearSquareProfile, curvilinear_square_profile, default_window

logger = logging.getLogger(__name__)


def superellipse_point(radius: float, m: float, center: float, t) -> np.ndarray:
    """Point of |x|^m + |y − center|^m = radius^m at parameter t; exact on the curve."""
    t = np.asarray(t, dtype=float)
    cos, sin = np.cos(t), np.sin(t)
    x = radius * np.sign(cos) * np.abs(cos) ** (2 / m)
    y = center + radius * np.sign(sin) * np.abs(sin) ** (2 / m)
    return np.stack([x, y], axis=-1)


class DomainSpec(BaseModel):
    """Two curvilinear squares inside a circular outer boundary ∂D.

    D₂ is centred at (0, −r₂) and D₁ at (0, ε + r₁), so the inclusions are closest above the
    origin. ε = 0 is the touching configuration, which is meshed only outside |x₁| < eta.
    """

    model_config = ConfigDict(frozen=True)

    d: int = Field(2, ge=2, le=2)
    r1: float = Field(1.0, gt=0)
    r2: float = Field(1.0, gt=0)
    m: float = Field(2.0, ge=2)
    epsilon: float = Field(ge=0)
    eta: float | None = Field(None, gt=0, description="Cusp cutoff for the touching configuration")
    outer_radius: float | None = Field(None, gt=0)
    window: float | None = Field(None, gt=0, description="Gap half-width R")

    @model_validator(mode="after")
    def check_layout(self):
        R = self.gap_window
        if 2 * R >= min(self.r1, self.r2):
            raise ValueError(f"gap window R = {R} too wide for radii ({self.r1}, {self.r2})")
        if self.eta is not None and self.eta >= R:
            raise ValueError(f"eta = {self.eta} must be smaller than the gap window R = {R}")
        # inclusion corners and poles must sit strictly inside the circle
        extremes = np.array(
            [
                [0.0, self.epsilon + 2 * self.r1],
                [self.r1, self.center1],
                [0.0, -2 * self.r2],
                [self.r2, self.center2],
            ]
        )
        distances = np.linalg.norm(extremes - self.outer_center, axis=1)
        if np.any(distances >= self.radius):
            raise ValueError("inclusions must lie strictly inside the outer boundary")
        return self

    @property
    def gap_window(self) -> float:
        return self.window if self.window is not None else default_window(self.r1, self.r2)

    @property
    def radius(self) -> float:
        return self.outer_radius if self.outer_radius is not None else 5 * max(self.r1, self.r2)

    @property
    def center1(self) -> float:
        return self.epsilon + self.r1

    @property
    def center2(self) -> float:
        return -self.r2

    @property
    def outer_center(self) -> np.ndarray:
        return np.array([0.0, (self.epsilon + self.r1 - self.r2) / 2])

    @property
    def touching(self) -> bool:
        return self.epsilon == 0

    @cached_property
    def profile(self) -> CurvilinearSquareProfile:
        return curvilinear_square_profile(self.r1, self.r2, self.m, R=self.gap_window)

    def with_epsilon(self, epsilon: float, eta: float | None = None) -> "DomainSpec":
        return self.model_validate({**self.model_dump(), "epsilon": epsilon, "eta": eta})

    def outline(self, which: int, t) -> np.ndarray:
        if which == 1:
            return superellipse_point(self.r1, self.m, self.center1, t)
        if which == 2:
            return superellipse_point(self.r2, self.m, self.center2, t)
        raise ValueError(f"inclusion index must be 1 or 2, got {which}")

    def window_parameter(self, which: int) -> float:
        """Parameter t where the inclusion outline crosses x₁ = R on the gap side."""
        radius = self.r1 if which == 1 else self.r2
        t = float(np.arccos((self.gap_window / radius) ** (self.m / 2)))
        return -t if which == 1 else t

    def on_inclusion(self, which: int, points, atol: float = 1e-10) -> np.ndarray:
        """True where points satisfy the implicit equation of ∂Dᵢ (relative to radius)."""
        points = np.asarray(points, dtype=float)
        radius, center = (self.r1, self.center1) if which == 1 else (self.r2, self.center2)
        level = (np.abs(points[..., 0]) / radius) ** self.m + (np.abs(points[..., 1] - center) / radius) ** self.m
        return np.abs(level - 1) <= atol

    def on_outer(self, points, atol: float = 1e-10) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return np.abs(np.linalg.norm(points - self.outer_center, axis=-1) - self.radius) <= atol * self.radius
