import numpy as np
import pytest
from scipy.spatial import cKDTree

from lamegap.errors import MeshError
from lamegap.geometry import (
    BoundaryTag,
    DomainSpec,
    MeshGrading,
    boundary_deviation,
    build_mesh,
    gap_crossings,
    read_mesh,
    write_mesh,
)


@pytest.fixture(scope="module")
def gap_mesh():
    spec = DomainSpec(r1=1.0, r2=1.0, m=2, epsilon=1e-2)
    return spec, build_mesh(spec, grading=MeshGrading(n_layers=8, target_h=0.1))


@pytest.fixture(scope="module")
def touching_mesh():
    spec = DomainSpec(r1=1.0, r2=1.0, m=2, epsilon=0.0, eta=1e-2)
    return spec, build_mesh(spec, grading=MeshGrading(n_layers=4, target_h=0.2))


def test_gap_layers(gap_mesh):
    spec, mesh = gap_mesh
    R = spec.gap_window
    for x1 in np.linspace(-0.99 * R, 0.99 * R, 36):
        assert gap_crossings(mesh, spec.profile, x1) >= 8


def test_no_inverted_elements(gap_mesh, touching_mesh):
    for _, mesh in (gap_mesh, touching_mesh):
        assert np.all(mesh.signed_areas() > 0)
        assert mesh.stats["max_aspect"] < 1e8


def test_mesh_is_mirror_symmetric(gap_mesh):
    _, mesh = gap_mesh
    right = {tuple(p) for p in mesh.nodes[mesh.nodes[:, 0] >= 0]}
    left = {(-x, y) for x, y in mesh.nodes[mesh.nodes[:, 0] <= 0]}
    assert right == left


def test_boundary_nodes_on_curves(gap_mesh, touching_mesh):
    for spec, mesh in (gap_mesh, touching_mesh):
        deviation = boundary_deviation(mesh, spec)
        assert deviation["inclusion1"] < 1e-10
        assert deviation["inclusion2"] < 1e-10
        assert deviation["outer"] < 1e-10 * spec.radius


def test_boundary_tags_partition_boundary(gap_mesh):
    _, mesh = gap_mesh
    assert set(np.unique(mesh.edge_tags)) == {BoundaryTag.OUTER, BoundaryTag.INCLUSION1, BoundaryTag.INCLUSION2}
    boundary_nodes = np.unique(mesh.boundary_edges)
    assert np.all(mesh.node_tags[boundary_nodes] != BoundaryTag.INTERIOR)
    # every tagged node sits on a boundary edge
    assert set(np.flatnonzero(mesh.node_tags != BoundaryTag.INTERIOR)) == set(boundary_nodes)


def test_touching_mesh_excludes_cusp(touching_mesh):
    spec, mesh = touching_mesh
    gap_points = mesh.nodes[mesh.gap_nodes]
    assert np.all(np.abs(gap_points[:, 0]) >= spec.eta)
    tags = set(np.unique(mesh.edge_tags))
    assert tags == {BoundaryTag.OUTER, BoundaryTag.INCLUSION1, BoundaryTag.INCLUSION2, BoundaryTag.CUT}
    cut = mesh.nodes[mesh.tagged_nodes(BoundaryTag.CUT)]
    np.testing.assert_allclose(np.abs(cut[:, 0]), spec.eta)
    assert mesh.eta == spec.eta


def test_touching_requires_eta():
    with pytest.raises(MeshError):
        build_mesh(DomainSpec(epsilon=0.0))


def test_halving_target_h_doubles_outer_nodes():
    spec = DomainSpec(r1=1.0, r2=1.0, m=2, epsilon=1e-2)
    coarse = build_mesh(spec, grading=MeshGrading(n_layers=4, target_h=0.2, outer_h=0.6))
    fine = build_mesh(spec, grading=MeshGrading(n_layers=4, target_h=0.1, outer_h=0.6))
    ratio = fine.stats["outside_gap_nodes"] / coarse.stats["outside_gap_nodes"]
    assert 1.4 <= ratio <= 2.6


def test_squares_mesh(squares4_profile):
    spec = DomainSpec(r1=1.0, r2=1.0, m=4, epsilon=1e-3)
    mesh = build_mesh(spec, squares4_profile, MeshGrading(n_layers=6, target_h=0.2))
    assert gap_crossings(mesh, squares4_profile, 0.01) >= 6
    assert gap_crossings(mesh, squares4_profile, 0.3) >= 6
    assert boundary_deviation(mesh, spec)["inclusion1"] < 1e-10


def test_aspect_limit_enforced():
    spec = DomainSpec(r1=1.0, r2=1.0, m=2, epsilon=1e-2)
    with pytest.raises(MeshError):
        build_mesh(spec, grading=MeshGrading(n_layers=4, target_h=0.2, max_aspect=2.0))


def test_grading_refinement():
    grading = MeshGrading(n_layers=4, target_h=0.2, gap_refinement_ratio=0.5).refined(2)
    assert grading.n_layers == 16
    assert grading.target_h == pytest.approx(0.05)
    assert grading.gap_refinement_ratio == pytest.approx(0.125)
    with pytest.raises(ValueError):
        grading.refined(-1)


def test_domain_rejects_inclusions_outside():
    with pytest.raises(ValueError):
        DomainSpec(r1=1.0, r2=1.0, epsilon=1e-2, outer_radius=1.5)


def test_closest_distance_is_epsilon():
    spec = DomainSpec(r1=1.0, r2=2.0, m=4, epsilon=1e-2)
    t = np.linspace(-np.pi, np.pi, 20001)
    upper = spec.outline(1, t)
    lower = spec.outline(2, t)
    lower_top = lower[np.argmax(lower[:, 1])]
    upper_bottom = upper[np.argmin(upper[:, 1])]
    assert upper_bottom[1] - lower_top[1] == pytest.approx(1e-2, abs=1e-12)
    # no pair of outline samples is closer than the gap
    distances, _ = cKDTree(lower).query(upper)
    assert distances.min() >= 1e-2 - 1e-12


def test_mesh_file_round_trip(touching_mesh, tmp_path):
    _, mesh = touching_mesh
    path = tmp_path / "touching.mesh"
    write_mesh(mesh, path)
    loaded = read_mesh(path)
    np.testing.assert_array_equal(loaded.nodes, mesh.nodes)
    np.testing.assert_array_equal(loaded.triangles, mesh.triangles)
    np.testing.assert_array_equal(loaded.edge_tags, mesh.edge_tags)
    np.testing.assert_array_equal(loaded.gap_nodes, mesh.gap_nodes)
    assert loaded.eta == mesh.eta
    assert loaded.epsilon == mesh.epsilon


def test_read_mesh_rejects_other_files(tmp_path):
    path = tmp_path / "bad.mesh"
    path.write_text("hello\n")
    with pytest.raises(MeshError):
        read_mesh(path)
