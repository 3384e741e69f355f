"""Dirichlet problems for the Lamé operator on the matrix region.

Every boundary node carries Dirichlet data, so the free dofs are exactly the interior
ones and one factorization of the interior stiffness serves all subproblems of a mesh.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import LinearOperator, cg, splu

from lamegap.elasticity import LameParameters
from lamegap.errors import SolverError
from lamegap.geometry import BoundaryTag, Mesh

from .assembly import assemble_stiffness
from .space import P2Space, p2_space, shape_gradients

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]


class SolverOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["direct", "cg"] = Field("direct", description="Sparse LU, or preconditioned CG")
    rtol: float = Field(1e-10, gt=0, description="Relative algebraic residual accepted")
    maxiter: int = Field(50_000, ge=1, description="CG iteration cap")


@dataclass(frozen=True)
class DirichletData:
    """Boundary values per boundary tag; each piece maps points (n, 2) to values (n, 2)."""

    label: str
    pieces: dict[BoundaryTag, VectorField]

    @classmethod
    def everywhere(cls, label: str, fn: VectorField) -> "DirichletData":
        return cls(label, {tag: fn for tag in BoundaryTag if tag != BoundaryTag.INTERIOR})

    def nodal_values(self, space: P2Space) -> np.ndarray:
        nodes = space.boundary_nodes
        tags = space.node_tags[nodes]
        values = np.zeros((len(nodes), 2))
        for tag in np.unique(tags):
            tag = BoundaryTag(int(tag))
            if tag not in self.pieces:
                raise ValueError(f"boundary data '{self.label}' has no values on {tag.name}")
            mask = tags == tag
            values[mask] = np.asarray(self.pieces[tag](space.nodes[nodes[mask]]), dtype=float).reshape(-1, 2)
        return values


def zero_field(points: np.ndarray) -> np.ndarray:
    return np.zeros(np.shape(points))


def _block_jacobi(K: csr_matrix) -> LinearOperator:
    """Inverse of the 2×2 diagonal blocks (one per node); free dofs come in node pairs."""
    a = K.diagonal()[0::2]
    c = K.diagonal()[1::2]
    b = K.diagonal(1)[0::2]
    det = a * c - b * b

    def apply(r):
        r = np.asarray(r).reshape(-1, 2)
        out = np.empty_like(r)
        out[:, 0] = (c * r[:, 0] - b * r[:, 1]) / det
        out[:, 1] = (a * r[:, 1] - b * r[:, 0]) / det
        return out.ravel()

    return LinearOperator(K.shape, matvec=apply, dtype=float)


@dataclass
class ElasticityProblem:
    """Stiffness of one mesh with the interior block factorized once."""

    space: P2Space
    params: LameParameters
    options: SolverOptions = field(default_factory=SolverOptions)
    stiffness: csr_matrix = field(init=False)
    fixed: np.ndarray = field(init=False)
    free: np.ndarray = field(init=False)

    def __post_init__(self):
        self.stiffness = assemble_stiffness(self.space, self.params)
        boundary = self.space.boundary_nodes
        self.fixed = (2 * boundary[:, None] + np.arange(2)).ravel()
        mask = np.ones(self.space.n_dofs, dtype=bool)
        mask[self.fixed] = False
        self.free = np.flatnonzero(mask)
        self._interior = self.stiffness[self.free][:, self.free].tocsr()
        self._coupling = self.stiffness[self.free][:, self.fixed].tocsr()
        self._factor = None
        self._method = self.options.method

    @classmethod
    def from_mesh(cls, mesh: Mesh, params: LameParameters, options: SolverOptions | None = None):
        return cls(p2_space(mesh), params, options or SolverOptions())

    @property
    def mesh(self) -> Mesh:
        return self.space.mesh

    def _factorize(self):
        if self._factor is not None or self._method != "direct":
            return
        try:
            self._factor = splu(self._interior.tocsc())
            logger.info(f"factorized interior stiffness: {len(self.free)} unknowns, {self._interior.nnz} nonzeros")
        except MemoryError:
            logger.warning("sparse LU ran out of memory; falling back to preconditioned CG")
            self._method = "cg"
        except RuntimeError as exc:
            raise SolverError(f"interior stiffness is singular: {exc}", stage="factorize") from exc

    def _residual(self, x: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        scale = np.linalg.norm(rhs, axis=0)
        scale[scale == 0] = 1.0
        return np.linalg.norm(self._interior @ x - rhs, axis=0) / scale

    def _solve_direct(self, rhs: np.ndarray) -> np.ndarray:
        x = self._factor.solve(rhs)
        residual = self._residual(x, rhs)
        if np.any(residual > self.options.rtol):
            logger.debug(f"refining direct solve, residual {residual.max():.3e}")
            x = x + self._factor.solve(rhs - self._interior @ x)
        return x

    def _solve_cg(self, rhs: np.ndarray) -> np.ndarray:
        preconditioner = _block_jacobi(self._interior)
        columns = []
        for k in range(rhs.shape[1]):
            x, info = cg(
                self._interior, rhs[:, k], rtol=self.options.rtol / 10, maxiter=self.options.maxiter, M=preconditioner
            )
            if info != 0:
                raise SolverError(f"CG did not converge (info={info}) for column {k}", stage="solve")
            columns.append(x)
        return np.column_stack(columns)

    def solve(
        self,
        data: Sequence[DirichletData],
        loads: Sequence[np.ndarray | None] | None = None,
        epsilon: float | None = None,
    ) -> list["FieldSolution"]:
        """Solve K u = f in the interior with u prescribed on every boundary node.

        One column per entry of `data`; `loads` are optional full-length load vectors.
        """
        data = list(data)
        if not data:
            return []
        loads = list(loads) if loads is not None else [None] * len(data)
        if len(loads) != len(data):
            raise ValueError("need one load (or None) per boundary data set")
        boundary = np.column_stack([d.nodal_values(self.space).ravel() for d in data])
        rhs = -(self._coupling @ boundary)
        for k, load in enumerate(loads):
            if load is not None:
                rhs[:, k] += np.asarray(load)[self.free]

        self._factorize()
        interior = self._solve_direct(rhs) if self._method == "direct" else self._solve_cg(rhs)
        residual = self._residual(interior, rhs)
        worst = float(residual.max())
        if worst > self.options.rtol:
            raise SolverError(f"relative residual {worst:.3e} above {self.options.rtol:.1e}", stage="solve")
        logger.debug(f"solved {len(data)} Dirichlet problems, max residual {worst:.3e}")

        solutions = []
        for k, d in enumerate(data):
            vector = np.zeros(self.space.n_dofs)
            vector[self.fixed] = boundary[:, k]
            vector[self.free] = interior[:, k]
            solutions.append(
                FieldSolution(
                    problem=self,
                    values=vector.reshape(-1, 2),
                    label=d.label,
                    epsilon=self.mesh.epsilon if epsilon is None else epsilon,
                    residual=float(residual[k]),
                )
            )
        return solutions


@dataclass(frozen=True)
class FieldSolution:
    problem: ElasticityProblem = field(repr=False)
    values: np.ndarray = field(repr=False)
    label: str
    epsilon: float
    residual: float = 0.0

    @property
    def space(self) -> P2Space:
        return self.problem.space

    @property
    def vector(self) -> np.ndarray:
        return self.values.ravel()

    @cached_property
    def energy(self) -> float:
        return energy_inner(self, self)

    def combine(self, others: Sequence["FieldSolution"], weights: Sequence[float], label: str) -> "FieldSolution":
        """self + Σ wₖ·othersₖ on the same mesh."""
        values = self.values.copy()
        for other, weight in zip(others, weights, strict=True):
            _check_same_mesh(self, other)
            values += weight * other.values
        residual = max([self.residual] + [o.residual for o in others])
        return FieldSolution(self.problem, values, label, self.epsilon, residual)


def _check_same_mesh(u: FieldSolution, v: FieldSolution):
    if u.space is not v.space:
        raise ValueError(f"fields '{u.label}' and '{v.label}' live on different meshes")


def energy_inner(u: FieldSolution, v: FieldSolution) -> float:
    """∫(ℂ⁰e(u), e(v)) over the mesh."""
    _check_same_mesh(u, v)
    return float(u.vector @ (u.problem.stiffness @ v.vector))


def solve_dirichlet(
    mesh: Mesh, params: LameParameters, boundary_data: DirichletData, options: SolverOptions | None = None
) -> FieldSolution:
    problem = ElasticityProblem.from_mesh(mesh, params, options)
    (solution,) = problem.solve([boundary_data])
    logger.info(f"{boundary_data.label}: energy {solution.energy:.6g}, residual {solution.residual:.2e}")
    return solution


def cell_gradients(solution: FieldSolution, bary=(1 / 3, 1 / 3, 1 / 3), cells: np.ndarray | None = None):
    """Gradients (n, 2, 2) of the discrete field at one barycentric point of each cell."""
    space = solution.space
    cells = np.arange(len(space.cells)) if cells is None else np.asarray(cells)
    dN = shape_gradients(np.asarray(bary, dtype=float), space.grad_bary[cells])
    local = solution.values[space.cells[cells]]
    return np.einsum("cai,cak->cik", local, dN)


def gradient_at(solution: FieldSolution, x) -> np.ndarray:
    """∇u at points (n, 2) or a single point; averaged over the elements sharing the point."""
    x = np.asarray(x, dtype=float)
    points = np.atleast_2d(x)
    space = solution.space
    out = np.empty((len(points), 2, 2))
    for k, (point, cells) in enumerate(zip(points, space.locate(points))):
        bary = space.barycentric(cells, point)
        dN = shape_gradients(bary, space.grad_bary[cells])
        local = solution.values[space.cells[cells]]
        out[k] = np.einsum("cai,cak->cik", local, dN).mean(axis=0)
    return out[0] if x.ndim == 1 else out
