"""Fixtures shared by every test package."""

import numpy as np
import pytest

from lamegap.elasticity import LameParameters
from lamegap.geometry import (
    BoundaryTag,
    DomainSpec,
    Mesh,
    MeshGrading,
    build_mesh,
    curvilinear_square_profile,
    power_profile,
)
from lamegap.geometry.mesh import boundary_edges


def structured_square(n: int) -> Mesh:
    """Unit square split into 2n² right triangles, every boundary node on OUTER."""
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    index = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    a, b = index[:-1, :-1].ravel(), index[1:, :-1].ravel()
    c, d = index[1:, 1:].ravel(), index[:-1, 1:].ravel()
    triangles = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    on_boundary = (nodes == 0.0).any(axis=1) | (nodes == 1.0).any(axis=1)
    tags = np.where(on_boundary, BoundaryTag.OUTER, BoundaryTag.INTERIOR).astype(np.int8)
    edges = boundary_edges(triangles)
    return Mesh(
        nodes=nodes,
        triangles=triangles,
        node_tags=tags,
        boundary_edges=edges,
        edge_tags=np.full(len(edges), BoundaryTag.OUTER, dtype=np.int8),
        gap_nodes=np.zeros(len(nodes), dtype=bool),
        epsilon=0.0,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def params():
    return LameParameters(lam=1.0, mu=1.0, d=2)


@pytest.fixture
def disks_profile():
    return curvilinear_square_profile(1.0, 1.0, 2)


@pytest.fixture
def squares4_profile():
    return curvilinear_square_profile(1.0, 1.0, 4)


@pytest.fixture
def parabola_profile():
    return power_profile(tau=1.0, m=2, R=0.5)


@pytest.fixture
def unit_square_mesh():
    return structured_square(4)


@pytest.fixture(scope="session")
def disks_mesh():
    spec = DomainSpec(r1=1.0, r2=1.0, m=2, epsilon=0.1)
    return build_mesh(spec, grading=MeshGrading(n_layers=4, target_h=0.2, gap_refinement_ratio=0.5))


@pytest.fixture
def starred_tables(rng):
    """Energy and b tables with the symmetry of a Gram matrix, for d = 2 unless asked otherwise."""

    def make(d: int = 2):
        N = d * (d + 1) // 2
        V = rng.normal(size=(2 * N, 2 * N + 3))
        energy = (V @ V.T).reshape(2, N, 2, N).transpose(0, 2, 1, 3)
        return energy, rng.normal(size=(2, N))

    return make
