"""Blow-up rates ρ₀, ρ₂ and the orders of the remainder terms in the expansions.

Remainder orders are used for reporting only; nothing is gated on them.
"""

import logging
import math
from enum import Enum

from lamegap.errors import RegimeError

from .constants import is_critical

logger = logging.getLogger(__name__)


class RemainderKind(str, Enum):
    EPS0 = "eps0"
    EPS2 = "eps2"
    EPS_BAR0 = "eps_bar0"
    EPS_BAR2 = "eps_bar2"
    EPS_HAT0 = "eps_hat0"
    EPS_HAT2 = "eps_hat2"


class Location(str, Enum):
    CENTER = "center"
    RING = "ring"


def _check_epsilon(epsilon: float):
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def _check_index(i: int):
    if i not in (0, 2):
        raise ValueError(f"rate index must be 0 or 2, got {i}")


def rho(i: int, d: int, m: float, epsilon: float) -> float:
    """ρᵢ(d, m; ε): ε^{(d+i−1)/m−1} above the critical exponent, |ln ε| at it, 1 below."""
    _check_index(i)
    _check_epsilon(epsilon)
    threshold = d + i - 1
    if is_critical(m, threshold):
        return abs(math.log(epsilon))
    if m > threshold:
        return epsilon ** (threshold / m - 1)
    return 1.0


def rho_exponent(i: int, d: int, m: float) -> float:
    """Power of ε in ρᵢ; 0 for the logarithmic and bounded branches."""
    _check_index(i)
    threshold = d + i - 1
    if m > threshold and not is_critical(m, threshold):
        return threshold / m - 1
    return 0.0


def rho_d(d: int, epsilon: float) -> float:
    _check_epsilon(epsilon)
    return abs(math.log(epsilon)) if d == 2 else 1.0


def _no_branch(kind: RemainderKind, d: int, m: float, sigma: float):
    return RegimeError(f"{kind.value} is not defined for d={d}, m={m}, sigma={sigma}", stage="remainder")


def _eps0(d, m, sigma, eps, log):
    if is_critical(m, d + 1):
        return 1 / log
    if m > d - 1 + sigma and sigma >= 2:
        return eps ** min(0.25, sigma / m, (m - d - 1) / m)
    if d + 1 < m <= d - 1 + sigma and sigma > 2:
        return eps ** min(0.25, (m - d - 1) / m)
    return None


def _eps2(d, m, sigma, eps, log):
    if is_critical(m, d + 1):
        return 1 / log
    if is_critical(m, d + 1 + sigma):
        return max(eps**0.25, eps ** (sigma / m) * log)
    if m > d + 1 + sigma:
        return eps ** min(0.25, sigma / m)
    if d + 1 < m < d + 1 + sigma:
        return eps ** min(0.25, (m - d - 1) / m)
    return None


def _eps_bar0(d, m, sigma, eps, log):
    if is_critical(m, d - 1):
        return 1 / log
    if sigma < 2 and is_critical(m, d - 1 + sigma):
        return max(eps ** (sigma / m) * log, eps ** ((d + 1 - m) / (12 * m)))
    if sigma < 2 and d - 1 + sigma < m < d + 1:
        return eps ** min(sigma / m, (d + 1 - m) / (12 * m))
    if sigma <= 2 and d - 1 < m < d - 1 + sigma:
        return eps ** min((m - d + 1) / m, (d + 1 - m) / (12 * m))
    return None


def _eps_bar2(d, m, sigma, eps, log):
    if is_critical(m, d - 1):
        return 1 / log
    if d - 1 < m < d + 1:
        return eps ** min((m - d + 1) / m, (d + 1 - m) / (12 * m))
    return None


def _eps_hat(i):
    def order(d, m, sigma, eps, log):
        threshold = d + i - 1
        if is_critical(m, threshold):
            return 1 / log
        if is_critical(m, threshold + sigma):
            return eps ** (sigma / m) * log
        if m > threshold + sigma:
            return eps ** (sigma / m)
        if m > threshold:
            return eps ** (1 - threshold / m)
        return eps ** min(1 / 6, (threshold - m) / (12 * m))

    return order


_ORDERS = {
    RemainderKind.EPS0: _eps0,
    RemainderKind.EPS2: _eps2,
    RemainderKind.EPS_BAR0: _eps_bar0,
    RemainderKind.EPS_BAR2: _eps_bar2,
    RemainderKind.EPS_HAT0: _eps_hat(0),
    RemainderKind.EPS_HAT2: _eps_hat(2),
}


def remainder_order(kind: RemainderKind | str, d: int, m: float, sigma: float, epsilon: float) -> float:
    """Order of the relative remainder of an expansion.

    `sigma` may be `math.inf` for exact power profiles. Raises RegimeError outside the
    branch domain of `kind`.
    """
    kind = RemainderKind(kind)
    _check_epsilon(epsilon)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    value = _ORDERS[kind](d, m, sigma, epsilon, abs(math.log(epsilon)))
    if value is None:
        raise _no_branch(kind, d, m, sigma)
    return value


def expansion_remainder(alpha: int, d: int, m: float, sigma: float, epsilon: float) -> tuple[RemainderKind, float]:
    """Remainder attached to the expansion of C₁^α − C₂^α in the regime selected by m."""
    translation = alpha <= d
    if m >= d + 1 or is_critical(m, d + 1):
        kind = RemainderKind.EPS0 if translation else RemainderKind.EPS2
    elif m >= d - 1 or is_critical(m, d - 1):
        kind = RemainderKind.EPS_BAR0 if translation else RemainderKind.EPS_BAR2
    else:
        kind = RemainderKind.EPS_HAT0 if translation else RemainderKind.EPS_HAT2
    return kind, remainder_order(kind, d, m, sigma, epsilon)


def energy_exponent(alpha: int, d: int, m: float) -> float:
    """Power of ε in a₁₁^{αα}: that of ρ₀ for translations, of ρ₂ for rotations."""
    return rho_exponent(0 if alpha <= d else 2, d, m)


def coefficient_exponent(alpha: int, d: int, m: float) -> float:
    """Power of ε in C₁^α − C₂^α, the reciprocal of a₁₁^{αα}."""
    return -energy_exponent(alpha, d, m)


def predicted_exponent(d: int, m: float, location: Location | str, alpha: int | None = None) -> float:
    """Expected power of ε in |∇u| across the gap at x′ = 0 or on the ring |x′| = ε^{1/m}.

    Translational terms behave like (ερ₀)⁻¹ everywhere in the neck. Rotational terms carry
    |x′|/δ, which is bounded at x′ = 0 and of size ε^{1/m−1} on the ring, divided by ρ₂.
    With `alpha` unset the dominant (most negative) exponent over all terms is returned.
    """
    location = Location(location)
    translational = -1 + coefficient_exponent(1, d, m)
    if location is Location.CENTER:
        rotational = coefficient_exponent(d + 1, d, m)
    else:
        rotational = 1 / m - 1 + coefficient_exponent(d + 1, d, m)
    if alpha is None:
        return min(translational, rotational)
    return translational if alpha <= d else rotational


def b_convergence_exponent(m: float, gamma: float | None = None) -> float:
    """Power of ε in |b₁^β − b₁^{*β}|.

    Cutting the neck at |x′| = ε^γ bounds v₁^β − v₁^{*β} by ε^{1−mγ} + ε^{mγ}; the balanced
    cut γ = 1/(2m) is the default.
    """
    gamma = 1 / (2 * m) if gamma is None else gamma
    if not 0 < m * gamma < 1:
        raise ValueError(f"the neck cut exponent must satisfy 0 < m*gamma < 1, got {m * gamma}")
    return min(1 - m * gamma, m * gamma)
