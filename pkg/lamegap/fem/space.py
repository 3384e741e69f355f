"""Quadratic Lagrange space on a triangle mesh.

Local node order per element: the three vertices, then the midpoints of the edges
(0,1), (1,2), (2,0). Global nodes are the mesh vertices followed by one midpoint per edge.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from lamegap.errors import ChartError
from lamegap.geometry import BoundaryTag, Mesh

logger = logging.getLogger(__name__)

LOCAL_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # barycentric coordinates, shape (q, 3)
    weights: np.ndarray  # sum to 1; multiply by the element area


EDGE_MIDPOINT_RULE = QuadratureRule(
    points=np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
    weights=np.full(3, 1 / 3),
)


def _dunavant5() -> QuadratureRule:
    a1, b1, w1 = 0.059715871789770, 0.470142064105115, 0.132394152788506
    a2, b2, w2 = 0.797426985353087, 0.101286507323456, 0.125939180544827
    points = [[1 / 3, 1 / 3, 1 / 3]]
    for a, b in ((a1, b1), (a2, b2)):
        points += [[a, b, b], [b, a, b], [b, b, a]]
    return QuadratureRule(points=np.array(points), weights=np.array([0.225] + [w1] * 3 + [w2] * 3))


DEGREE5_RULE = _dunavant5()

QUADRATURE = {2: EDGE_MIDPOINT_RULE, 5: DEGREE5_RULE}


def shape_values(bary: np.ndarray) -> np.ndarray:
    """P2 shape functions at barycentric points (..., 3) -> (..., 6)."""
    L = np.asarray(bary, dtype=float)
    vertex = L * (2 * L - 1)
    edge = 4 * L[..., LOCAL_EDGES[:, 0]] * L[..., LOCAL_EDGES[:, 1]]
    return np.concatenate([vertex, edge], axis=-1)


def shape_gradients(bary: np.ndarray, grad_bary: np.ndarray) -> np.ndarray:
    """Physical gradients (n, 6, 2) of the P2 shape functions.

    `bary` is (n, 3) or (3,), `grad_bary` is (n, 3, 2) with the gradients of the barycentric
    coordinates of each element.
    """
    L = np.broadcast_to(np.asarray(bary, dtype=float), grad_bary.shape[:-1])
    vertex = (4 * L - 1)[..., None] * grad_bary
    i, j = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
    edge = 4 * (L[..., i, None] * grad_bary[..., j, :] + L[..., j, None] * grad_bary[..., i, :])
    return np.concatenate([vertex, edge], axis=-2)


@dataclass(frozen=True)
class P2Space:
    mesh: Mesh
    nodes: np.ndarray
    cells: np.ndarray
    node_tags: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @cached_property
    def cell_dofs(self) -> np.ndarray:
        """Interleaved dofs 2·node + component, shape (n_cells, 12)."""
        return (2 * self.cells[:, :, None] + np.arange(2)).reshape(len(self.cells), 12)

    @cached_property
    def areas(self) -> np.ndarray:
        return np.abs(self.mesh.signed_areas())

    @cached_property
    def grad_bary(self) -> np.ndarray:
        p = self.mesh.nodes[self.mesh.triangles]
        x, y = p[..., 0], p[..., 1]
        twice_area = self.mesh.signed_areas()[:, None] * 2
        grads = np.stack(
            [
                np.stack([y[:, 1] - y[:, 2], x[:, 2] - x[:, 1]], axis=-1),
                np.stack([y[:, 2] - y[:, 0], x[:, 0] - x[:, 2]], axis=-1),
                np.stack([y[:, 0] - y[:, 1], x[:, 1] - x[:, 0]], axis=-1),
            ],
            axis=1,
        )
        return grads / twice_area[..., None]

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.node_tags != BoundaryTag.INTERIOR)

    @cached_property
    def _centroid_tree(self) -> cKDTree:
        return cKDTree(self.mesh.nodes[self.mesh.triangles].mean(axis=1))

    def barycentric(self, cells: np.ndarray, x: np.ndarray) -> np.ndarray:
        corners = self.mesh.nodes[self.mesh.triangles[cells]]
        offset = x - corners[..., 0, :]
        grads = self.grad_bary[cells]
        l1 = np.sum(grads[..., 1, :] * offset, axis=-1)
        l2 = np.sum(grads[..., 2, :] * offset, axis=-1)
        return np.stack([1 - l1 - l2, l1, l2], axis=-1)

    def locate(self, x, tol: float = 1e-10, candidates: int = 64) -> list[np.ndarray]:
        """Elements containing each point (several on shared edges and vertices)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        k = min(candidates, len(self.cells))
        _, nearest = self._centroid_tree.query(x, k=k)
        nearest = np.asarray(nearest).reshape(len(x), k)
        found = []
        for point, cells in zip(x, nearest):
            inside = cells[np.all(self.barycentric(cells, point) >= -tol, axis=-1)]
            if len(inside) == 0:
                everything = np.arange(len(self.cells))
                inside = everything[np.all(self.barycentric(everything, point) >= -tol, axis=-1)]
            if len(inside) == 0:
                raise ChartError(f"point {point.tolist()} lies outside the mesh")
            found.append(inside)
        return found

    def interpolate(self, fn) -> np.ndarray:
        """Nodal interpolant of a vector field: fn maps (n, 2) points to (n, 2) values."""
        return np.asarray(fn(self.nodes), dtype=float).reshape(self.n_nodes, 2)


def _edge_keys(pairs: np.ndarray, n: int) -> np.ndarray:
    pairs = np.sort(pairs, axis=-1)
    return pairs[..., 0].astype(np.int64) * n + pairs[..., 1]


def p2_space(mesh: Mesh) -> P2Space:
    n = mesh.n_nodes
    local = mesh.triangles[:, LOCAL_EDGES]
    keys = _edge_keys(local, n)
    unique, inverse = np.unique(keys.ravel(), return_inverse=True)
    edge_ids = inverse.reshape(keys.shape)

    ends = np.stack([unique // n, unique % n], axis=-1)
    midpoints = 0.5 * (mesh.nodes[ends[:, 0]] + mesh.nodes[ends[:, 1]])

    edge_tags = np.full(len(unique), int(BoundaryTag.INTERIOR))
    boundary_ids = np.searchsorted(unique, _edge_keys(mesh.boundary_edges, n))
    edge_tags[boundary_ids] = mesh.edge_tags

    space = P2Space(
        mesh=mesh,
        nodes=np.vstack([mesh.nodes, midpoints]),
        cells=np.hstack([mesh.triangles, n + edge_ids]),
        node_tags=np.concatenate([mesh.node_tags, edge_tags]),
    )
    logger.debug(f"P2 space: {space.n_nodes} nodes, {space.n_dofs} dofs, {len(space.cells)} cells")
    return space
