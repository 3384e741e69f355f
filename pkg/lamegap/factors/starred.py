"""Touching-configuration quantities a*ᵢⱼ^{αβ}, b*ᵢ^β on the truncated region Ω*.

The cusp at the contact point is cut out at |x′| = η. Every entry is computed at η and
at η/2 and accepted when the two values agree within a tolerance. Entries of the 𝔸*-block
that diverge as η → 0 are masked instead of being reported as large numbers.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import pandas as pd

from lamegap.asymptotics import BoundaryField
from lamegap.asymptotics.constants import is_critical
from lamegap.elasticity import LameParameters, rigid_basis
from lamegap.errors import InstabilityError, RegimeError
from lamegap.fem import ElasticityProblem, SolverOptions, solve_subproblems
from lamegap.geometry import DomainSpec, GapProfile, MeshGrading, build_mesh

from .cusp import regular_energy

logger = logging.getLogger(__name__)

STABILITY_COLUMNS = ["entry", "value", "value_half", "rel_diff"]


class Regime(str, Enum):
    """Case split on m: every diagonal a₁₁^{αα} diverges (FLAT), only translations diverge
    (MIDDLE), or none does (SHARP)."""

    FLAT = "m >= d+1"
    MIDDLE = "d-1 <= m < d+1"
    SHARP = "m < d-1"


def regime_of(d: int, m: float) -> Regime:
    if m > d + 1 or is_critical(m, d + 1):
        return Regime.FLAT
    if m > d - 1 or is_critical(m, d - 1):
        return Regime.MIDDLE
    return Regime.SHARP


def diverges(alpha: int, d: int, m: float) -> bool:
    """Whether a*₁₁^{αα} is infinite: translations for m ≥ d−1, rotations for m ≥ d+1."""
    rigid_basis(d).check_index(alpha)
    threshold = d - 1 if alpha <= d else d + 1
    return m > threshold or is_critical(m, threshold)


def divergent_mask(d: int, m: float) -> np.ndarray:
    """Mask over 𝔸*[β, α]: a diagonal entry with divergent α, or a pair of divergent modes."""
    flags = np.array([diverges(alpha, d, m) for alpha in range(1, rigid_basis(d).size + 1)])
    return np.outer(flags, flags)


def relative_change(value, reference, atol: float = 0.0) -> np.ndarray:
    value, reference = np.asarray(value, dtype=float), np.asarray(reference, dtype=float)
    scale = np.maximum(np.abs(reference), atol)
    difference = np.abs(value - reference)
    return np.divide(difference, scale, out=np.zeros_like(difference), where=scale > 0)


@dataclass(frozen=True)
class StarredQuantities:
    """Raw tables at the cutoffs η and η/2.

    `energy[i, j, α, β] = ∫(ℂ⁰e(v_i^{*α}), e(v_j^{*β}))` and `b[j, β]`; the finer cutoff
    provides the accepted values. `regular[α]` holds the principal energy with its singular
    part removed over the gap window R = `window` (NaN where a*₁₁^{αα} stays finite).
    """

    d: int
    m: float
    eta: float
    energy: np.ndarray
    energy_half: np.ndarray
    b: np.ndarray
    b_half: np.ndarray
    tolerance: float = 0.05
    regular: np.ndarray | None = None
    regular_half: np.ndarray | None = None
    window: float | None = None

    @classmethod
    def from_tables(cls, d: int, m: float, energy, b, energy_half=None, b_half=None, eta: float = 0.0, **kwargs):
        """Bundle externally supplied tables; a missing η/2 table repeats the η one."""
        energy = np.asarray(energy, dtype=float)
        b = np.asarray(b, dtype=float)
        N = rigid_basis(d).size
        if energy.shape != (2, 2, N, N) or b.shape != (2, N):
            raise ValueError(f"expected tables of shape (2, 2, {N}, {N}) and (2, {N}), got {energy.shape}, {b.shape}")
        return cls(
            d=d,
            m=m,
            eta=eta,
            energy=energy,
            energy_half=energy if energy_half is None else np.asarray(energy_half, dtype=float),
            b=b,
            b_half=b if b_half is None else np.asarray(b_half, dtype=float),
            **kwargs,
        )

    @property
    def size(self) -> int:
        return rigid_basis(self.d).size

    @property
    def regime(self) -> Regime:
        return regime_of(self.d, self.m)

    @cached_property
    def mask(self) -> np.ndarray:
        return divergent_mask(self.d, self.m)

    def blocks(self, half: bool = True) -> dict[str, np.ndarray]:
        """𝔸* (masked), 𝔹*, ℂ*, 𝔻* with entry [β, α], and Y¹ = b*₁, Y² = b*₁ + b*₂."""
        a = self.energy_half if half else self.energy
        b = self.b_half if half else self.b
        return {
            "A": np.ma.masked_array(a[0, 0].T, mask=self.mask),
            "B": (a[0, 0] + a[1, 0]).T,
            "C": (a[0, 0] + a[0, 1]).T,
            "D": a.sum(axis=(0, 1)).T,
            "Y1": b[0],
            "Y2": b[0] + b[1],
        }

    def a11(self, alpha: int, beta: int, half: bool = True) -> float:
        """a*₁₁^{αβ}; RegimeError when it is infinite for this m."""
        if self.mask[beta - 1, alpha - 1]:
            raise RegimeError(
                f"a*11^{{{alpha}{beta}}} is infinite for d={self.d}, m={self.m} ({self.regime.value})",
                stage="starred",
            )
        table = self.energy_half if half else self.energy
        return float(table[0, 0, alpha - 1, beta - 1])

    def raw_diagonal(self, alpha: int, half: bool = True) -> float:
        """a*₁₁^{αα} on the truncated region, finite for every η > 0 whatever the regime."""
        table = self.energy_half if half else self.energy
        return float(table[0, 0, alpha - 1, alpha - 1])

    def regular_diagonal(self, alpha: int, half: bool = True) -> float | None:
        """a*₁₁^{αα}(η) − 𝓛∫_{η<|x₁|<R} w/(h₁−h₂) when the singular part was split off, else None."""
        table = self.regular_half if half else self.regular
        if table is None or self.window is None or not np.isfinite(table[alpha - 1]):
            return None
        return float(table[alpha - 1])

    @cached_property
    def stability(self) -> pd.DataFrame:
        """Every entry the regime uses, at η and η/2, with the relative difference."""
        coarse, fine = self.blocks(half=False), self.blocks(half=True)
        N = self.size
        labels = {
            "A": "a*_11^{{{a},{b}}}",
            "B": "sum_i a*_i1^{{{a},{b}}}",
            "D": "sum_ij a*_ij^{{{a},{b}}}",
        }
        scale = max(float(np.abs(self.energy_half).max()), float(np.abs(self.b_half).max()), 1.0)
        rows = []
        for name, pattern in labels.items():
            for beta in range(N):
                for alpha in range(N):
                    if name == "A" and self.mask[beta, alpha]:
                        continue
                    value, value_half = float(coarse[name][beta, alpha]), float(fine[name][beta, alpha])
                    rows.append((pattern.format(a=alpha + 1, b=beta + 1), value, value_half))
        for name, pattern in (("Y1", "b*_1^{{{b}}}"), ("Y2", "sum_i b*_i^{{{b}}}")):
            for beta in range(N):
                rows.append((pattern.format(b=beta + 1), float(coarse[name][beta]), float(fine[name][beta])))
        frame = pd.DataFrame(rows, columns=STABILITY_COLUMNS[:3])
        frame["rel_diff"] = relative_change(frame["value"], frame["value_half"], atol=1e-12 * scale)
        return frame

    @property
    def max_rel_diff(self) -> float:
        return float(self.stability["rel_diff"].max())

    @property
    def stable(self) -> bool:
        return self.max_rel_diff <= self.tolerance

    def check_stability(self, enforce: bool = False):
        if self.stable:
            return
        worst = self.stability.loc[self.stability["rel_diff"].idxmax()]
        message = (
            f"starred entry {worst['entry']} changes by {worst['rel_diff']:.2%} between eta={self.eta:g} and "
            f"eta/2 (tolerance {self.tolerance:.0%})"
        )
        if enforce:
            raise InstabilityError(message, stage="starred")
        logger.warning(message)


def _regular_table(problem: ElasticityProblem, profile: GapProfile, m: float) -> np.ndarray | None:
    if not profile.has_derivatives:
        logger.info("profile without derivatives: principal energies keep their singular part")
        return None
    if not problem.mesh.eta < problem.mesh.window / 2:
        logger.warning(f"cutoff eta={problem.mesh.eta:g} too wide to split off the singular part")
        return None
    table = np.full(rigid_basis(2).size, np.nan)
    for alpha in range(1, len(table) + 1):
        if diverges(alpha, 2, m):
            table[alpha - 1] = regular_energy(problem, alpha, profile).value
    return table


def starred_quantities(
    spec: DomainSpec,
    params: LameParameters,
    phi: BoundaryField,
    eta: float,
    grading: MeshGrading | None = None,
    options: SolverOptions | None = None,
    tolerance: float = 0.05,
    enforce: bool = False,
) -> StarredQuantities:
    """Solve v_i^{*α} and v₀* on Ω* truncated at η and at η/2 and tabulate a*, b*."""
    if eta <= 0:
        raise ValueError(f"the cusp cutoff must be positive, got {eta}")
    profile = spec.profile
    tables = []
    for cutoff in (eta, eta / 2):
        touching = spec.with_epsilon(0.0, eta=cutoff)
        mesh = build_mesh(touching, profile, grading)
        subproblems = solve_subproblems(mesh, params, phi, profile=profile, options=options)
        regular = _regular_table(subproblems.problem, profile, spec.m)
        tables.append((subproblems.energy_table, subproblems.b_table, regular))
        logger.info(f"touching configuration at eta={cutoff:g}: {mesh.n_nodes} vertices")
    (energy, b, regular), (energy_half, b_half, regular_half) = tables
    starred = StarredQuantities(
        d=params.d,
        m=spec.m,
        eta=eta,
        energy=energy,
        energy_half=energy_half,
        b=b,
        b_half=b_half,
        tolerance=tolerance,
        regular=regular,
        regular_half=regular_half,
        window=spec.gap_window,
    )
    logger.info(f"starred quantities ({starred.regime.value}): max eta/2 change {starred.max_rel_diff:.2e}")
    starred.check_stability(enforce)
    return starred
