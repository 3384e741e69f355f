import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

logger = logging.getLogger(__name__)

MIN_SAMPLES = 3
MIN_DECADES = 1.0


class RateFit(BaseModel):
    """Least-squares slope of ln(value) against ln(ε)."""

    model_config = ConfigDict(frozen=True)

    epsilons: tuple[float, ...]
    values: tuple[float, ...]
    exponent: float
    intercept: float
    half_width: float
    confidence: float = 0.95

    @property
    def decades(self) -> float:
        return math.log10(max(self.epsilons) / min(self.epsilons))

    def predict(self, epsilon: float) -> float:
        return math.exp(self.intercept) * epsilon**self.exponent

    def agrees_with(self, predicted: float, tolerance: float) -> bool:
        return abs(self.exponent - predicted) <= tolerance


def fit_rate(epsilons, values, confidence: float = 0.95) -> RateFit:
    epsilons = np.asarray(epsilons, dtype=float)
    values = np.asarray(values, dtype=float)
    if epsilons.shape != values.shape or epsilons.ndim != 1:
        raise ValueError(f"epsilons {epsilons.shape} and values {values.shape} must be matching 1-d samples")
    if len(epsilons) < MIN_SAMPLES:
        raise ValueError(f"a rate fit needs at least {MIN_SAMPLES} samples, got {len(epsilons)}")
    if np.any(epsilons <= 0) or np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise ValueError("a log-log fit needs positive, finite epsilons and values")
    decades = math.log10(epsilons.max() / epsilons.min())
    if decades < MIN_DECADES - 1e-12:
        raise ValueError(f"samples span {decades:.2f} decades, at least {MIN_DECADES:g} is required")
    x, y = np.log(epsilons), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    dof = len(x) - 2
    stderr = math.sqrt(float(residuals @ residuals) / dof / float(np.sum((x - x.mean()) ** 2))) if dof > 0 else 0.0
    half_width = float(stats.t.ppf(0.5 + confidence / 2, dof)) * stderr if dof > 0 else math.inf
    logger.debug(f"fitted exponent {slope:.4f} ± {half_width:.2e} over {decades:.2f} decades")
    return RateFit(
        epsilons=tuple(epsilons.tolist()),
        values=tuple(values.tolist()),
        exponent=float(slope),
        intercept=float(intercept),
        half_width=half_width,
        confidence=confidence,
    )
