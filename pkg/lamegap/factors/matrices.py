"""Blow-up factor matrices and the leading terms of C₁^α − C₂^α.

All matrices are cut out of the full starred system

    M* = [[𝔸*, 𝔹*], [ℂ*, 𝔻*]],  Y* = [b*₁; b*₁ + b*₂]

by selecting rows and columns and replacing one column with the matching part of Y*:

* m ≥ d+1: 𝔽*^α borders 𝔻* with b*₁^α, the row α of 𝔹* and Y²;
* d−1 ≤ m < d+1: 𝔽₀* keeps the rotations and the second block, 𝔽₁*^α adds the translation
  α with its column replaced, 𝔽₂*^α replaces the rotation column α of 𝔽₀*;
* m < d−1: 𝔽* = M*, and 𝔽₃*^α replaces column α of M*.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor

from lamegap.asymptotics import ConstantsBundle, RemainderKind, expansion_remainder, rho
from lamegap.errors import RegimeError, SingularSystemError

from .starred import Regime, StarredQuantities, regime_of

logger = logging.getLogger(__name__)

DET_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Determinant:
    value: float
    relative: float
    condition: float

    @property
    def singular(self) -> bool:
        """Numerically singular: 1/cond(F) below the threshold, NaN or infinite condition included."""
        return not self.condition * DET_THRESHOLD < 1


def determinant(matrix: np.ndarray) -> Determinant:
    """Determinant from a pivoted LU factorization.

    Singularity is judged by the 2-norm condition number. `relative` is |det| over Hadamard's
    bound (the product of the row norms); it shrinks geometrically with the size even for
    well-conditioned matrices and is kept for reporting only.
    """
    matrix = np.asarray(matrix, dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix, check_finite=True)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    value = float((-1) ** swaps * np.prod(np.diag(lu)))
    bound = float(np.prod(np.linalg.norm(matrix, axis=1)))
    relative = abs(value) / bound if bound > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        condition = float(np.linalg.cond(matrix))
    return Determinant(value=value, relative=relative, condition=condition)


def _system(starred: StarredQuantities, half: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """M* with NaN where 𝔸* is infinite, and Y*."""
    blocks = starred.blocks(half=half)
    A = blocks["A"].filled(np.nan)
    M = np.block([[A, blocks["B"]], [blocks["C"], blocks["D"]]])
    return M, np.concatenate([blocks["Y1"], blocks["Y2"]])


def _cut(M: np.ndarray, Y: np.ndarray, index: list[int], replace: int | None = None) -> np.ndarray:
    sub = M[np.ix_(index, index)].copy()
    if replace is not None:
        sub[:, index.index(replace)] = Y[index]
    if np.isnan(sub).any():
        raise RegimeError("factor matrix needs an entry that is infinite in this regime", stage="factors")
    return sub


def matrix_layout(regime: Regime, d: int) -> dict[str, tuple[list[int], int | None]]:
    """Row/column selection and replaced column (0-based, in M*) of every factor matrix."""
    N = d * (d + 1) // 2
    translations = list(range(d))
    rotations = list(range(d, N))
    second = list(range(N, 2 * N))
    if regime is Regime.FLAT:
        layout = {"D*": (second, None)}
        layout |= {f"F*^{alpha + 1}": ([alpha] + second, alpha) for alpha in range(N)}
    elif regime is Regime.MIDDLE:
        layout = {"F0*": (rotations + second, None)}
        layout |= {f"F1*^{alpha + 1}": ([alpha] + rotations + second, alpha) for alpha in translations}
        layout |= {f"F2*^{alpha + 1}": (rotations + second, alpha) for alpha in rotations}
    else:
        everything = list(range(2 * N))
        layout = {"F*": (everything, None)}
        layout |= {f"F3*^{alpha + 1}": (everything, alpha) for alpha in range(N)}
    return layout


@dataclass(frozen=True)
class FactorMatrices:
    regime: Regime
    d: int
    m: float
    eta: float
    blocks: dict[str, np.ndarray]
    matrices: dict[str, np.ndarray]
    determinants: dict[str, Determinant]
    coarse_determinants: dict[str, float] = field(default_factory=dict)
    starred: StarredQuantities | None = field(default=None, compare=False)

    @property
    def size(self) -> int:
        return self.d * (self.d + 1) // 2

    @property
    def d_min_eigenvalue(self) -> float:
        D = self.blocks["D"]
        return float(np.linalg.eigvalsh(0.5 * (D + D.T)).min())

    def det(self, name: str) -> float:
        return self.determinants[name].value

    def names(self, alpha: int) -> tuple[str, str]:
        """Numerator and denominator matrices of the ratio for α."""
        if not 1 <= alpha <= self.size:
            raise ValueError(f"alpha must lie in 1..{self.size}, got {alpha}")
        if self.regime is Regime.FLAT:
            return f"F*^{alpha}", "D*"
        if self.regime is Regime.MIDDLE:
            return (f"F1*^{alpha}" if alpha <= self.d else f"F2*^{alpha}"), "F0*"
        return f"F3*^{alpha}", "F*"

    def ratio(self, alpha: int) -> float:
        """Determinant ratio behind the leading value of C₁^α − C₂^α, before any ε scaling."""
        numerator, denominator = self.names(alpha)
        below = self.determinants[denominator]
        if below.singular:
            raise SingularSystemError(
                f"det {denominator} vanishes (condition {below.condition:.2e} > {1 / DET_THRESHOLD:g})", stage="factors"
            )
        return self.determinants[numerator].value / below.value


def assemble_matrices(starred: StarredQuantities, regime: Regime | None = None) -> FactorMatrices:
    regime = starred.regime if regime is None else Regime(regime)
    M, Y = _system(starred)
    layout = matrix_layout(regime, starred.d)
    matrices = {name: _cut(M, Y, index, replace) for name, (index, replace) in layout.items()}
    determinants = {name: determinant(matrix) for name, matrix in matrices.items()}
    M_coarse, Y_coarse = _system(starred, half=False)
    coarse = {name: determinant(_cut(M_coarse, Y_coarse, *cut)).value for name, cut in layout.items()}
    factors = FactorMatrices(
        regime=regime,
        d=starred.d,
        m=starred.m,
        eta=starred.eta,
        blocks=starred.blocks(),
        matrices=matrices,
        determinants=determinants,
        coarse_determinants=coarse,
        starred=starred,
    )
    if factors.d_min_eigenvalue <= 0:
        logger.warning(f"D* is not positive definite (min eigenvalue {factors.d_min_eigenvalue:.3e})")
    for name, det in determinants.items():
        logger.debug(f"det {name} = {det.value:.6e} (relative {det.relative:.2e}, condition {det.condition:.2e})")
    return factors


@dataclass(frozen=True)
class CoefficientExpansion:
    alpha: int
    epsilon: float
    value: float
    remainder_kind: RemainderKind | None
    remainder: float | None

    def __float__(self) -> float:
        return self.value


def coeff_expansion(
    alpha: int,
    d: int,
    m: float,
    sigma: float,
    epsilon: float,
    factors: FactorMatrices,
    constants: ConstantsBundle,
) -> CoefficientExpansion:
    """Leading value of C₁^α − C₂^α in the regime of (d, m)."""
    regime = regime_of(d, m)
    if factors.regime is not regime or factors.d != d:
        raise RegimeError(
            f"factor matrices were assembled for {factors.regime.value} (d={factors.d}), "
            f"not {regime.value} (d={d})",
            stage="factors",
        )
    value = factors.ratio(alpha)
    translation = alpha <= d
    if regime is Regime.FLAT:
        i = 0 if translation else 2
        value /= constants.lame(alpha) * constants.require(i) * rho(i, d, m, epsilon)
    elif regime is Regime.MIDDLE and translation:
        value /= constants.lame(alpha) * constants.require(0) * rho(0, d, m, epsilon)
    try:
        kind, remainder = expansion_remainder(alpha, d, m, sigma, epsilon)
    except RegimeError:
        kind, remainder = None, None
    return CoefficientExpansion(alpha=alpha, epsilon=epsilon, value=value, remainder_kind=kind, remainder=remainder)
