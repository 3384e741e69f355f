"""The subproblems v_i^α, v₀ of the linear decomposition and the functionals aᵢⱼ^{αβ}, bⱼ^β.

Both functionals are evaluated through the energy form: aᵢⱼ^{αβ} = ∫(ℂ⁰e(v_i^α), e(v_j^β)) and
bⱼ^β = −∫(ℂ⁰e(v_j^β), e(w)) for any lift w with trace φ on ∂D and zero on the inclusions.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from lamegap.asymptotics import BoundaryField, aux_u1, aux_u2
from lamegap.elasticity import LameParameters, rigid_basis
from lamegap.geometry import BoundaryTag, GapProfile, Mesh

from .solver import DirichletData, ElasticityProblem, FieldSolution, SolverOptions, energy_inner, zero_field

logger = logging.getLogger(__name__)


def _rigid(alpha: int):
    basis = rigid_basis(2)
    return lambda x: basis.evaluate(alpha, x)


def inclusion_data(
    alpha: int, which: int, params: LameParameters, profile: GapProfile | None = None, touching: bool = False
) -> DirichletData:
    """Data of v_which^α: ψ_α on ∂D_which, zero on the other inclusion and on ∂D.

    On the truncated touching mesh the cut |x₁| = η carries the explicit field ū_which^{*α}.
    """
    if which not in (1, 2):
        raise ValueError(f"inclusion index must be 1 or 2, got {which}")
    rigid_basis(2).check_index(alpha)
    own = BoundaryTag.INCLUSION1 if which == 1 else BoundaryTag.INCLUSION2
    other = BoundaryTag.INCLUSION2 if which == 1 else BoundaryTag.INCLUSION1
    pieces = {own: _rigid(alpha), other: zero_field, BoundaryTag.OUTER: zero_field}
    if touching:
        if profile is None:
            raise ValueError("the cut boundary of a touching mesh needs the gap profile")
        aux = aux_u1 if which == 1 else aux_u2
        pieces[BoundaryTag.CUT] = lambda x: aux(alpha, profile, 0.0, params, x)
    return DirichletData(f"v{which}^{alpha}", pieces)


def outer_data(phi: BoundaryField) -> DirichletData:
    """Data of v₀: φ on ∂D, zero on both inclusions and on the cut."""
    return DirichletData(
        "v0",
        {
            BoundaryTag.OUTER: phi.value,
            BoundaryTag.INCLUSION1: zero_field,
            BoundaryTag.INCLUSION2: zero_field,
            BoundaryTag.CUT: zero_field,
        },
    )


@dataclass(frozen=True)
class SubproblemSet:
    problem: ElasticityProblem
    v1: tuple[FieldSolution, ...]
    v2: tuple[FieldSolution, ...]
    v0: FieldSolution | None = None

    @property
    def size(self) -> int:
        return len(self.v1)

    @property
    def epsilon(self) -> float:
        return self.problem.mesh.epsilon

    @property
    def touching(self) -> bool:
        return self.problem.mesh.eta is not None

    def field(self, i: int, alpha: int) -> FieldSolution:
        if i not in (1, 2):
            raise ValueError(f"subproblem index must be 1 or 2, got {i}")
        return (self.v1 if i == 1 else self.v2)[alpha - 1]

    @cached_property
    def energy_table(self) -> np.ndarray:
        """a[i−1, j−1, α−1, β−1] = ∫(ℂ⁰e(v_i^α), e(v_j^β))."""
        V = np.stack([s.vector for s in self.v1 + self.v2])
        gram = V @ (self.problem.stiffness @ V.T)
        N = self.size
        return gram.reshape(2, N, 2, N).transpose(0, 2, 1, 3)

    @cached_property
    def b_table(self) -> np.ndarray:
        """b[j−1, β−1] = −∫(ℂ⁰e(v_j^β), e(v₀))."""
        if self.v0 is None:
            raise ValueError("no lift of the outer data was solved")
        return np.array([[compute_b(j, beta, self) for beta in range(1, self.size + 1)] for j in (1, 2)])


def solve_subproblems(
    mesh: Mesh,
    params: LameParameters,
    phi: BoundaryField | None = None,
    profile: GapProfile | None = None,
    options: SolverOptions | None = None,
    problem: ElasticityProblem | None = None,
) -> SubproblemSet:
    """v₁^α, v₂^α for every α and, when φ is given, v₀, all from one factorization."""
    problem = problem or ElasticityProblem.from_mesh(mesh, params, options)
    touching = mesh.eta is not None
    N = rigid_basis(2).size
    data = [inclusion_data(alpha, i, params, profile, touching) for i in (1, 2) for alpha in range(1, N + 1)]
    if phi is not None:
        data.append(outer_data(phi))
    solutions = problem.solve(data)
    subproblems = SubproblemSet(
        problem=problem,
        v1=tuple(solutions[:N]),
        v2=tuple(solutions[N : 2 * N]),
        v0=solutions[2 * N] if phi is not None else None,
    )
    logger.info(
        f"solved {len(data)} subproblems at epsilon={mesh.epsilon:g}"
        + (f", eta={mesh.eta:g}" if touching else "")
        + f", max residual {max(s.residual for s in solutions):.2e}"
    )
    return subproblems


def compute_a(i: int, j: int, alpha: int, beta: int, solutions: SubproblemSet) -> float:
    return energy_inner(solutions.field(i, alpha), solutions.field(j, beta))


def compute_b(j: int, beta: int, solutions: SubproblemSet, lift: FieldSolution | None = None) -> float:
    """bⱼ^β through the energy identity; any lift with the same boundary values gives the same value."""
    lift = lift if lift is not None else solutions.v0
    if lift is None:
        raise ValueError("b needs a lift of the outer data")
    return -energy_inner(solutions.field(j, beta), lift)


def nodal_lift(problem: ElasticityProblem, phi: BoundaryField) -> FieldSolution:
    """Lift equal to φ at the outer boundary nodes and zero at every other node."""
    space = problem.space
    values = np.zeros((space.n_nodes, 2))
    outer = np.flatnonzero(space.node_tags == BoundaryTag.OUTER)
    values[outer] = phi.value(space.nodes[outer])
    return FieldSolution(problem, values, "nodal lift", problem.mesh.epsilon)
