"""Experiment configuration: a sectioned key/value file validated into pydantic blocks.

    [geometry]  shape, r1, r2, m, window, outer_radius, tau, split
    [material]  lambda, mu
    [boundary]  preset, alpha, matrix, offset, table
    [mesh]      level and the MeshGrading fields
    [probes]    t, band
    [output]    directory, metrics, quantities, fits, summary, plot
    [run]       epsilons, eta, r0, threads, seed, factors, enforce_stability

Lists are separated by commas or whitespace; a list entry may be written 10^p.
"""

import configparser
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lamegap.asymptotics import BoundaryField
from lamegap.elasticity import LameParameters
from lamegap.errors import ConfigError
from lamegap.geometry import (
    DomainSpec,
    GapProfile,
    MeshGrading,
    curvilinear_square_profile,
    power_profile,
)
from lamegap.geometry.profiles import default_window
from lamegap.reconstruction import DEFAULT_PROBE_T

logger = logging.getLogger(__name__)

DEFAULT_EPSILONS = (10**-1.5, 1e-2, 10**-2.5, 1e-3)


def parse_number(token: str) -> float:
    token = token.strip()
    if token.startswith("10^"):
        return 10 ** float(token[3:])
    return float(token)


def parse_list(value: Any) -> Any:
    if isinstance(value, str):
        tokens = value.replace(",", " ").split()
        try:
            return [parse_number(token) for token in tokens]
        except ValueError as exc:
            raise ValueError(f"cannot read a number list from {value!r}") from exc
    return value


class Shape(str, Enum):
    DISKS = "disks"
    SQUARES = "squares"
    POWER = "power"


class Preset(str, Enum):
    RIGID = "rigid"
    LINEAR = "linear"
    GENERIC = "generic"
    CUSTOM = "custom"


class Block(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GeometryBlock(Block):
    shape: Shape = Shape.SQUARES
    r1: float = Field(1.0, gt=0)
    r2: float = Field(1.0, gt=0)
    m: float = Field(2.0, ge=2)
    window: float | None = Field(None, gt=0, description="Gap half-width R")
    outer_radius: float | None = Field(None, gt=0)
    tau: float = Field(1.0, gt=0, description="Leading gap coefficient of a power profile")
    split: float = Field(0.5, ge=0, le=1)

    @model_validator(mode="after")
    def check_shape(self):
        if self.shape is Shape.DISKS and self.m != 2:
            raise ValueError(f"disks have m = 2, got m = {self.m}")
        return self

    @property
    def profile(self) -> GapProfile:
        if self.shape is Shape.POWER:
            R = self.window if self.window is not None else default_window(self.r1, self.r2)
            return power_profile(self.tau, self.m, R, split=self.split)
        return curvilinear_square_profile(self.r1, self.r2, self.m, R=self.window)


class MaterialBlock(Block):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    lam: float = Field(1.0, alias="lambda")
    mu: float = 1.0

    @model_validator(mode="after")
    def check_ellipticity(self):
        LameParameters(lam=self.lam, mu=self.mu, d=2)
        return self


class BoundaryBlock(Block):
    preset: Preset = Preset.GENERIC
    alpha: int = Field(1, ge=1, le=3, description="Rigid motion ψ_α for the rigid preset")
    matrix: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 1.0)
    offset: tuple[float, float] = (0.0, 0.0)
    table: Path | None = Field(None, description="CSV with columns theta, phi1, phi2 along the outer boundary")

    @field_validator("matrix", "offset", mode="before")
    @classmethod
    def split_lists(cls, value):
        return parse_list(value)

    @model_validator(mode="after")
    def check_table(self):
        if self.preset is Preset.CUSTOM and self.table is None:
            raise ValueError("the custom preset needs a trace table")
        return self

    def field(self, seed: int, center=(0.0, 0.0), radius: float = 1.0) -> BoundaryField:
        if self.preset is Preset.RIGID:
            return BoundaryField.rigid(self.alpha, 2)
        if self.preset is Preset.LINEAR:
            return BoundaryField.affine(np.reshape(self.matrix, (2, 2)), self.offset)
        if self.preset is Preset.GENERIC:
            # x -> -φ(2c - x) keeps the affine part and negates the quadratic one, which drives the rotation
            rng = np.random.default_rng(seed)
            matrix, offset = rng.normal(size=(2, 2)), rng.normal(size=2)
            return BoundaryField.quadratic(matrix, offset, rng.normal(size=(2, 2, 2)) / radius, center)
        return trace_table_field(self.table, center)


def trace_table_field(path: Path, center) -> BoundaryField:
    """φ interpolated periodically in the polar angle about `center`."""
    try:
        table = pd.read_csv(path).sort_values("theta")
        theta, phi1, phi2 = (table[name].to_numpy(dtype=float) for name in ("theta", "phi1", "phi2"))
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read boundary trace table {path}: {exc}") from exc
    if len(theta) < 2:
        raise ConfigError(f"boundary trace table {path} needs at least two rows")
    center = np.asarray(center, dtype=float)

    def value(x):
        rel = np.asarray(x, dtype=float) - center
        angle = np.arctan2(rel[..., 1], rel[..., 0])
        period = 2 * math.pi
        return np.stack(
            [np.interp(angle, theta, phi1, period=period), np.interp(angle, theta, phi2, period=period)], axis=-1
        )

    return BoundaryField(value=value)


class MeshBlock(MeshGrading):
    model_config = ConfigDict(frozen=True, extra="forbid")

    level: int = Field(0, ge=0, description="Each level halves target_h and the column ratio, doubles the layers")

    @property
    def grading(self) -> MeshGrading:
        return MeshGrading(**self.model_dump(exclude={"level"})).refined(self.level)


class ProbeBlock(Block):
    t: tuple[float, ...] = DEFAULT_PROBE_T
    band: float = Field(1.0, ge=0, description="Constant in front of ‖φ‖ for the bounded term")

    @field_validator("t", mode="before")
    @classmethod
    def split_list(cls, value):
        return parse_list(value)

    @field_validator("t")
    @classmethod
    def check_t(cls, value):
        if not value or any(t < 0 for t in value):
            raise ValueError("probe positions must be a non-empty list of non-negative numbers")
        return value


class OutputBlock(Block):
    directory: Path = Path("results")
    metrics: str = "metrics.csv"
    quantities: str = "quantities.csv"
    fits: str = "fits.csv"
    summary: str = "summary.md"
    plot: str = "rates.svg"
    factors: str = "factors.txt"


class RunBlock(Block):
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    eta: float = Field(0.02, gt=0, description="Cusp cutoff of the touching configuration")
    r0: float | None = Field(None, gt=0, description="Split radius of the geometry constants")
    threads: int | None = Field(None, ge=1)
    seed: int = 0
    factors: bool = True
    enforce_stability: bool = False

    @field_validator("epsilons", mode="before")
    @classmethod
    def split_list(cls, value):
        return parse_list(value)

    @field_validator("epsilons")
    @classmethod
    def check_epsilons(cls, value):
        if not value:
            raise ValueError("at least one epsilon is required")
        if any(not 0 < eps < 1 for eps in value):
            raise ValueError(f"every epsilon must lie in (0, 1), got {list(value)}")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError(f"epsilons must be strictly decreasing, got {list(value)}")
        return value


class ExperimentConfig(Block):
    geometry: GeometryBlock = GeometryBlock()
    material: MaterialBlock = MaterialBlock()
    boundary: BoundaryBlock = BoundaryBlock()
    mesh: MeshBlock = MeshBlock()
    probes: ProbeBlock = ProbeBlock()
    output: OutputBlock = OutputBlock()
    run: RunBlock = RunBlock()

    @property
    def params(self) -> LameParameters:
        return LameParameters(lam=self.material.lam, mu=self.material.mu, d=2)

    @property
    def profile(self) -> GapProfile:
        return self.geometry.profile

    @property
    def grading(self) -> MeshGrading:
        return self.mesh.grading

    @property
    def r0(self) -> float:
        return self.run.r0 if self.run.r0 is not None else 0.25 * min(self.geometry.r1, self.geometry.r2)

    def domain_spec(self, epsilon: float, eta: float | None = None) -> DomainSpec:
        g = self.geometry
        if g.shape is Shape.POWER:
            raise ConfigError("power profiles only feed the formulas; finite elements need disks or squares")
        try:
            return DomainSpec(
                r1=g.r1, r2=g.r2, m=g.m, epsilon=epsilon, eta=eta, window=g.window, outer_radius=g.outer_radius
            )
        except ValidationError as exc:
            raise ConfigError(f"invalid geometry: {exc}") from exc

    def boundary_field(self) -> BoundaryField:
        center, radius = (0.0, 0.0), 1.0
        if self.geometry.shape is not Shape.POWER:
            spec = self.domain_spec(self.run.epsilons[0])
            center, radius = tuple(spec.outer_center), spec.radius
        return self.boundary.field(self.run.seed, center, radius)

    def with_overrides(
        self,
        epsilons: list[float] | None = None,
        mesh_level: int | None = None,
        eta: float | None = None,
        threads: int | None = None,
        out: Path | None = None,
    ) -> "ExperimentConfig":
        """Command-line values win over the file."""
        data = self.model_dump(by_alias=True)
        if epsilons is not None:
            data["run"]["epsilons"] = epsilons
        if mesh_level is not None:
            data["mesh"]["level"] = mesh_level
        if eta is not None:
            data["run"]["eta"] = eta
        if threads is not None:
            data["run"]["threads"] = threads
        if out is not None:
            data["output"]["directory"] = out
        return validate_config(data)


def validate_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration:\n{exc}") from exc


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"configuration file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    known = set(ExperimentConfig.model_fields)
    unknown = [section for section in parser.sections() if section not in known]
    if unknown:
        raise ConfigError(f"unknown section(s) in {path}: {', '.join(unknown)}")
    data = {section: dict(parser.items(section)) for section in parser.sections()}
    table = data.get("boundary", {}).get("table")
    if table and not Path(table).is_absolute():
        data["boundary"]["table"] = str(path.parent / table)
    config = validate_config(data)
    logger.info(f"loaded configuration {path}")
    return config
