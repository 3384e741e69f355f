import numpy as np
import pytest

from lamegap.elasticity import LameParameters, rigid_basis
from lamegap.errors import ChartError
from lamegap.fem import DEGREE5_RULE, EDGE_MIDPOINT_RULE, element_stiffness, p2_space
from lamegap.fem.space import shape_gradients, shape_values
from lamegap.geometry import BoundaryTag


def random_bary(rng, n):
    raw = rng.random((n, 3))
    return raw / raw.sum(axis=1, keepdims=True)


def test_partition_of_unity(rng):
    bary = random_bary(rng, 50)
    np.testing.assert_allclose(shape_values(bary).sum(axis=-1), 1.0, rtol=0, atol=1e-14)


def test_shape_functions_are_nodal():
    nodes = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0.5, 0.5, 0], [0, 0.5, 0.5], [0.5, 0, 0.5]])
    np.testing.assert_allclose(shape_values(nodes), np.eye(6), atol=1e-14)


def test_gradients_sum_to_zero(unit_square_mesh, rng):
    space = p2_space(unit_square_mesh)
    for bary in random_bary(rng, 5):
        dN = shape_gradients(bary, space.grad_bary)
        np.testing.assert_allclose(dN.sum(axis=1), 0.0, atol=1e-12)


def test_quadrature_rules_integrate_polynomials():
    # ∫ L₀² over the reference triangle is area/6, ∫ L₀²L₁² is area/90
    for rule in (EDGE_MIDPOINT_RULE, DEGREE5_RULE):
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
        assert rule.weights @ rule.points[:, 0] ** 2 == pytest.approx(1 / 6, abs=1e-14)
    assert DEGREE5_RULE.weights @ (DEGREE5_RULE.points[:, 0] * DEGREE5_RULE.points[:, 1]) ** 2 == pytest.approx(
        1 / 90, abs=1e-12
    )


def test_p2_space_layout(unit_square_mesh):
    mesh = unit_square_mesh
    space = p2_space(mesh)
    n_edges = 40 + 16  # 4×4 grid: grid lines plus one diagonal per square
    assert space.n_nodes == mesh.n_nodes + n_edges
    assert space.n_dofs == 2 * space.n_nodes
    # a closed boundary loop has as many midpoints as vertices
    assert len(space.boundary_nodes) == 2 * len(mesh.boundary_edges)
    assert set(np.unique(space.node_tags[space.boundary_nodes])) == {BoundaryTag.OUTER}
    midpoints = space.nodes[space.cells[:, 3:]]
    corners = space.nodes[space.cells[:, :3]]
    np.testing.assert_allclose(midpoints, 0.5 * (corners + np.roll(corners, -1, axis=1)), atol=1e-15)


def test_interpolation_reproduces_quadratics(unit_square_mesh, rng):
    space = p2_space(unit_square_mesh)
    values = space.interpolate(lambda x: np.column_stack([x[:, 0] ** 2, x[:, 0] * x[:, 1]]))
    points = rng.random((20, 2))
    for point, cells in zip(points, space.locate(points)):
        cell = cells[0]
        N = shape_values(space.barycentric(cell, point))
        approx = N @ values[space.cells[cell]]
        np.testing.assert_allclose(approx, [point[0] ** 2, point[0] * point[1]], atol=1e-13)


def test_locate_shared_vertex(unit_square_mesh):
    space = p2_space(unit_square_mesh)
    (cells,) = space.locate([0.5, 0.5])
    assert len(cells) == 6


def test_locate_outside_raises(unit_square_mesh):
    space = p2_space(unit_square_mesh)
    with pytest.raises(ChartError):
        space.locate([[1.5, 0.5]])


def test_element_stiffness_kernel(unit_square_mesh, params):
    space = p2_space(unit_square_mesh)
    Ke = element_stiffness(space, params)
    np.testing.assert_allclose(Ke, np.swapaxes(Ke, 1, 2), atol=1e-12)
    basis = rigid_basis(2)
    local = space.nodes[space.cells]
    for alpha in range(1, basis.size + 1):
        rigid = np.stack([basis.evaluate(alpha, pts) for pts in local]).reshape(len(local), 12)
        np.testing.assert_allclose(np.einsum("eij,ej->ei", Ke, rigid), 0.0, atol=1e-12)


def test_element_stiffness_rejects_3d(unit_square_mesh):
    space = p2_space(unit_square_mesh)
    with pytest.raises(ValueError):
        element_stiffness(space, LameParameters(lam=1.0, mu=1.0, d=3))
