import numpy as np
import pytest

from lamegap.asymptotics import BoundaryField
from lamegap.elasticity import LameParameters
from lamegap.fem import compute_a, compute_b, inclusion_data, nodal_lift, solve_subproblems
from lamegap.fem.limit import block_matrices
from lamegap.geometry import BoundaryTag

PARAMS = LameParameters(lam=1.0, mu=1.0, d=2)
SHEAR = np.array([[0.4, -0.3], [1.1, 0.2]])


@pytest.fixture(scope="module")
def subproblems(disks_mesh):
    return solve_subproblems(disks_mesh, PARAMS, BoundaryField.affine(np.eye(2)))


def test_set_layout(subproblems):
    assert subproblems.size == 3
    assert subproblems.epsilon == pytest.approx(0.1)
    assert not subproblems.touching
    assert subproblems.field(2, 3) is subproblems.v2[2]
    with pytest.raises(ValueError):
        subproblems.field(3, 1)


def test_subproblem_boundary_data(subproblems):
    space = subproblems.problem.space
    own = space.node_tags == BoundaryTag.INCLUSION1
    other = space.node_tags == BoundaryTag.INCLUSION2
    outer = space.node_tags == BoundaryTag.OUTER
    v = subproblems.field(1, 3)
    np.testing.assert_array_equal(v.values[own], np.column_stack([space.nodes[own, 1], -space.nodes[own, 0]]))
    assert np.all(v.values[other] == 0) and np.all(v.values[outer] == 0)
    np.testing.assert_array_equal(subproblems.v0.values[outer], space.nodes[outer])


def test_diagonal_energies_positive(subproblems):
    for i in (1, 2):
        for alpha in range(1, 4):
            assert compute_a(i, i, alpha, alpha, subproblems) > 0


def test_energy_table_symmetry(subproblems):
    a = subproblems.energy_table
    scale = np.abs(a).max()
    np.testing.assert_allclose(a, a.transpose(1, 0, 3, 2), rtol=0, atol=1e-10 * scale)
    assert compute_a(1, 2, 1, 3, subproblems) == pytest.approx(a[0, 1, 0, 2], rel=1e-10)


def test_block_structure(subproblems):
    blocks = block_matrices(subproblems.energy_table)
    scale = np.abs(blocks.full).max()
    np.testing.assert_allclose(blocks.C, blocks.B.T, rtol=0, atol=1e-10 * scale)
    assert np.all(np.linalg.eigvalsh(0.5 * (blocks.D + blocks.D.T)) > 0)


def test_b_vanishes_for_zero_data(subproblems, disks_mesh):
    zero = solve_subproblems(disks_mesh, PARAMS, BoundaryField.zero(2), problem=subproblems.problem)
    np.testing.assert_array_equal(zero.b_table, 0.0)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_b_is_independent_of_the_lift(subproblems, disks_mesh, alpha):
    phi = BoundaryField.rigid(alpha, 2)
    solved = solve_subproblems(disks_mesh, PARAMS, phi, problem=subproblems.problem)
    lift = nodal_lift(subproblems.problem, phi)
    for j in (1, 2):
        for beta in range(1, 4):
            harmonic = compute_b(j, beta, solved)
            nodal = compute_b(j, beta, solved, lift=lift)
            assert nodal == pytest.approx(harmonic, abs=1e-8 * max(1.0, abs(harmonic)))


def test_b_is_linear(subproblems, disks_mesh):
    first = BoundaryField.affine(SHEAR)
    second = BoundaryField.affine(np.eye(2), [0.3, -0.5])
    both = BoundaryField.affine(SHEAR + np.eye(2), [0.3, -0.5])
    tables = [
        solve_subproblems(disks_mesh, PARAMS, phi, problem=subproblems.problem).b_table for phi in (first, second, both)
    ]
    scale = np.abs(tables[2]).max()
    np.testing.assert_allclose(tables[0] + tables[1], tables[2], rtol=0, atol=1e-10 * scale)


def test_b_needs_a_lift(subproblems, disks_mesh):
    bare = solve_subproblems(disks_mesh, PARAMS, problem=subproblems.problem)
    assert bare.v0 is None
    with pytest.raises(ValueError):
        bare.b_table
    with pytest.raises(ValueError):
        compute_b(1, 1, bare)


def test_inclusion_data_validation(disks_profile):
    with pytest.raises(ValueError):
        inclusion_data(1, 3, PARAMS)
    with pytest.raises(ValueError):
        inclusion_data(4, 1, PARAMS)
    with pytest.raises(ValueError):
        inclusion_data(1, 1, PARAMS, touching=True)
    data = inclusion_data(2, 1, PARAMS, disks_profile, touching=True)
    assert BoundaryTag.CUT in data.pieces
