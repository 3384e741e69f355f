class LamegapError(Exception):
    """Base class for every error raised by lamegap."""


class ConfigError(LamegapError):
    """Invalid experiment configuration or parameters."""


class ChartError(LamegapError, ValueError):
    """A point or a parameter lies outside the chart where the gap profile is defined."""


class NumericalError(LamegapError):
    """A numerical stage failed. Carries the stage name for diagnostics."""

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        message = super().__str__()
        return f"[{self.stage}] {message}" if self.stage else message


class MeshError(NumericalError):
    pass


class SolverError(NumericalError):
    pass


class SingularSystemError(NumericalError):
    pass


class RegimeError(NumericalError, ValueError):
    """A quantity was requested outside the range of m where it is defined or finite."""


class InstabilityError(NumericalError):
    """A cutoff-stability check (η or r₀) failed."""
