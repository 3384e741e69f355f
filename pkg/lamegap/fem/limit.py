"""The limit problem with rigid inclusions, solved through its linear decomposition.

u = Σ(C₁^α − C₂^α)v₁^α + ΣC₂^α(v₁^α + v₂^α) + v₀, and the free constants follow from
the vanishing flux moments on ∂D₁ and on ∂D₁ ∪ ∂D₂:

    [[𝔸, 𝔹], [ℂ, 𝔻]] · [X¹; X²] = [Y¹; Y²],  X¹ = C₁ − C₂, X² = C₂, Y¹ = b₁, Y² = b₁ + b₂,

with 𝔸 = (a₁₁^{αβ}), 𝔹 = (Σᵢaᵢ₁^{αβ}), ℂ = (Σⱼa₁ⱼ^{αβ}), 𝔻 = (Σᵢⱼaᵢⱼ^{αβ}); row β, column α.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from lamegap.asymptotics import BoundaryField
from lamegap.elasticity import LameParameters
from lamegap.errors import SingularSystemError
from lamegap.geometry import Mesh

from .functionals import SubproblemSet, solve_subproblems
from .solver import FieldSolution, SolverOptions, energy_inner

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class BlockMatrices:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])


def block_matrices(energy_table: np.ndarray) -> BlockMatrices:
    """𝔸, 𝔹, ℂ, 𝔻 from a[i, j, α, β]; entry [β, α] of each block."""
    a = np.asarray(energy_table)
    return BlockMatrices(
        A=a[0, 0].T,
        B=(a[0, 0] + a[1, 0]).T,
        C=(a[0, 0] + a[0, 1]).T,
        D=a.sum(axis=(0, 1)).T,
    )


@dataclass(frozen=True)
class CoefficientSolution:
    X1: np.ndarray
    X2: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray
    blocks: BlockMatrices
    condition: float
    flux_moments: np.ndarray | None = None

    @property
    def C1(self) -> np.ndarray:
        return self.X1 + self.X2

    @property
    def C2(self) -> np.ndarray:
        return self.X2


def solve_coefficients(subproblems: SubproblemSet) -> CoefficientSolution:
    blocks = block_matrices(subproblems.energy_table)
    b = subproblems.b_table
    Y1, Y2 = b[0], b[0] + b[1]
    M = blocks.full
    condition = float(np.linalg.cond(M))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularSystemError(f"block system condition number {condition:.3e}", stage="coefficients")
    try:
        X = cho_solve(cho_factor(M), np.concatenate([Y1, Y2]))
    except LinAlgError as exc:
        raise SingularSystemError(f"block system is not positive definite: {exc}", stage="coefficients") from exc
    N = subproblems.size
    logger.debug(f"coefficient system solved, condition {condition:.3e}")
    return CoefficientSolution(X1=X[:N], X2=X[N:], Y1=Y1, Y2=Y2, blocks=blocks, condition=condition)


def reconstruct(subproblems: SubproblemSet, coefficients: CoefficientSolution) -> FieldSolution:
    if subproblems.v0 is None:
        raise ValueError("reconstruction needs v0")
    fields = list(subproblems.v1) + list(subproblems.v1) + list(subproblems.v2)
    weights = np.concatenate([coefficients.X1, coefficients.X2, coefficients.X2])
    return subproblems.v0.combine(fields, weights, label="u")


def flux_moments(u: FieldSolution, subproblems: SubproblemSet) -> np.ndarray:
    """∫_{∂D_j}(∂u/∂ν)·ψ_β as ∫(ℂ⁰e(u), e(v_j^β)); shape (2, N).

    For u built by `reconstruct` these are the residuals of the block system (row j = 1 is
    𝔸X¹ + 𝔹X² − Y¹, the two rows sum to ℂX¹ + 𝔻X² − Y²), so they vanish up to round-off at
    any mesh size. They check the linear solve, not the discretization.
    """
    betas = range(1, subproblems.size + 1)
    return np.array([[energy_inner(u, subproblems.field(j, beta)) for beta in betas] for j in (1, 2)])


def solve_limit_problem(
    mesh: Mesh,
    params: LameParameters,
    phi: BoundaryField,
    epsilon: float | None = None,
    options: SolverOptions | None = None,
    subproblems: SubproblemSet | None = None,
) -> tuple[FieldSolution, CoefficientSolution]:
    if epsilon is not None and not np.isclose(epsilon, mesh.epsilon, rtol=1e-12, atol=0):
        raise ValueError(f"mesh was built for epsilon={mesh.epsilon}, not {epsilon}")
    if mesh.eta is not None:
        raise ValueError("the limit problem is posed on a separated configuration, not a truncated touching mesh")
    if subproblems is None:
        subproblems = solve_subproblems(mesh, params, phi, options=options)
    coefficients = solve_coefficients(subproblems)
    u = reconstruct(subproblems, coefficients)
    moments = flux_moments(u, subproblems)
    scale = max(float(np.abs(subproblems.b_table).max()), 1.0)
    logger.info(
        f"limit problem at epsilon={mesh.epsilon:g}: condition {coefficients.condition:.3e}, "
        f"relative flux moments {np.abs(moments).max() / scale:.2e}"
    )
    return u, replace(coefficients, flux_moments=moments)
