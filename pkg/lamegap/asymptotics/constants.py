import logging
import math

from pydantic import BaseModel, ConfigDict, Field, computed_field
from scipy.special import gamma

from lamegap.elasticity import LameParameters
from lamegap.errors import RegimeError

logger = logging.getLogger(__name__)

CRITICAL_TOL = 1e-12


def is_critical(m: float, threshold: float) -> bool:
    return math.isclose(m, threshold, rel_tol=0.0, abs_tol=CRITICAL_TOL)


def unit_ball_volume(n: int) -> float:
    """ω_n, the volume of the n-dimensional unit ball."""
    if n < 0:
        raise ValueError(f"dimension must be non-negative, got {n}")
    return math.pi ** (n / 2) / float(gamma(n / 2 + 1))


def gamma_bracket(d: int, m: float, i: int) -> float | None:
    """Γ(1−s)Γ(s) with s = (d+i−1)/m when m > d+i−1, 1 at m = d+i−1, undefined below."""
    threshold = d + i - 1
    if is_critical(m, threshold):
        return 1.0
    if m < threshold:
        return None
    s = threshold / m
    return float(gamma(1 - s) * gamma(s))


def lame_factors(params: LameParameters) -> tuple[float, ...]:
    """𝓛_d^α for α = 1..d(d+1)/2: μ for the first d−1 translations, λ+2μ for e_d and the
    rotations mixing x_d, 2μ for the remaining rotations."""
    d = params.d
    size = d * (d + 1) // 2
    lam, mu = params.lam, params.mu
    values = [mu] * (d - 1) + [lam + 2 * mu] * d
    return tuple(values + [2 * mu] * (size - len(values)))


class ConstantsBundle(BaseModel):
    """The blow-up constants of a gap with leading coefficient τ and exponent m.

    `M0` is defined for m ≥ d−1 and `M2` for m ≥ d+1; reading either outside its range
    raises RegimeError.
    """

    model_config = ConfigDict(frozen=True)

    d: int = Field(ge=2)
    m: float = Field(ge=2)
    tau: float = Field(gt=0)
    omega: float = Field(description="Volume of the (d−1)-dimensional unit ball")
    gamma0: float | None = Field(None, description="Γ-bracket at (d−1)/m")
    gamma2: float | None = Field(None, description="Γ-bracket at (d+1)/m")
    L: tuple[float, ...]

    @computed_field
    @property
    def M0(self) -> float | None:
        if self.gamma0 is None:
            return None
        s = (self.d - 1) / self.m
        return (self.d - 1) * self.omega * self.gamma0 / (self.m * self.tau**s)

    @computed_field
    @property
    def M2(self) -> float | None:
        if self.gamma2 is None:
            return None
        s = (self.d + 1) / self.m
        return self.omega * self.gamma2 / (self.m * self.tau**s)

    def require(self, i: int) -> float:
        """M_i, raising RegimeError where it is undefined."""
        if i not in (0, 2):
            raise ValueError(f"constant index must be 0 or 2, got {i}")
        value = self.M0 if i == 0 else self.M2
        if value is None:
            bound = self.d - 1 if i == 0 else self.d + 1
            raise RegimeError(f"M{i} needs m >= {bound}, got m = {self.m}", stage="constants")
        return value

    def lame(self, alpha: int) -> float:
        if not 1 <= alpha <= len(self.L):
            raise ValueError(f"alpha must lie in 1..{len(self.L)}, got {alpha}")
        return self.L[alpha - 1]


def constants(d: int, m: float, tau: float, params: LameParameters) -> ConstantsBundle:
    if params.d != d:
        raise ValueError(f"material dimension {params.d} differs from d = {d}")
    bundle = ConstantsBundle(
        d=d,
        m=m,
        tau=tau,
        omega=unit_ball_volume(d - 1),
        gamma0=gamma_bracket(d, m, 0),
        gamma2=gamma_bracket(d, m, 2),
        L=lame_factors(params),
    )
    logger.debug(f"constants d={d} m={m} tau={tau}: M0={bundle.M0} M2={bundle.M2} L={bundle.L}")
    return bundle
