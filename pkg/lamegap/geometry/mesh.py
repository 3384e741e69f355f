"""Graded triangulation of the matrix region Ω (or the truncated touching region Ω*).

The right half x₁ ≥ 0 is built first: a structured layer block fills the gap over
[0, R] (or [η, R] when touching) and Triangle meshes the rest of the half-disk. The left
half is the mirror image, sharing the nodes on the symmetry axis, so the mesh is exactly
symmetric in x₁.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np
import triangle
from pydantic import BaseModel, ConfigDict, Field

from lamegap.errors import MeshError

from .domain import DomainSpec
from .profiles import GapProfile

logger = logging.getLogger(__name__)


class BoundaryTag(IntEnum):
    INTERIOR = 0
    OUTER = 1
    INCLUSION1 = 2
    INCLUSION2 = 3
    CUT = 4


class MeshGrading(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_layers: int = Field(8, ge=1, description="Element layers across the gap")
    target_h: float = Field(0.1, gt=0, description="Element size along the inclusions")
    gap_refinement_ratio: float = Field(0.25, gt=0, le=1, description="Column width relative to distance from x'=0")
    outer_h: float | None = Field(None, gt=0, description="Element size near the outer boundary")
    min_angle: float = Field(30.0, gt=0, le=34)
    max_aspect: float = Field(1e8, gt=1)

    def refined(self, level: int) -> "MeshGrading":
        """Every level halves target_h and the column ratio and doubles the gap layers."""
        if level < 0:
            raise ValueError(f"mesh level must be non-negative, got {level}")
        scale = 2**level
        return self.model_copy(
            update={
                "n_layers": self.n_layers * scale,
                "target_h": self.target_h / scale,
                "gap_refinement_ratio": self.gap_refinement_ratio / scale,
            }
        )


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    triangles: np.ndarray
    node_tags: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: np.ndarray
    gap_nodes: np.ndarray
    epsilon: float
    eta: float | None = None
    n_layers: int = 0
    window: float = 0.0
    quadrature_order: int = 2
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        a, b, c = (self.nodes[self.triangles[:, k]] for k in range(3))
        return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    def aspect_ratios(self) -> np.ndarray:
        """Longest edge squared over twice the area; 2/√3 for an equilateral triangle."""
        corners = self.nodes[self.triangles]
        edges = corners[:, [1, 2, 0]] - corners
        longest = np.max(np.sum(edges**2, axis=-1), axis=1)
        return longest / (2 * np.abs(self.signed_areas()))

    def tagged_nodes(self, tag: BoundaryTag) -> np.ndarray:
        return np.flatnonzero(self.node_tags == tag)


def _column_positions(start: float, stop: float, grading: MeshGrading, length_scale: float) -> np.ndarray:
    xs = [start]
    while xs[-1] < stop:
        step = min(grading.target_h, grading.gap_refinement_ratio * max(length_scale, xs[-1]))
        xs.append(xs[-1] + step)
    if len(xs) > 2 and stop - xs[-2] < 0.5 * (xs[-2] - xs[-3]):
        xs.pop(-2)
    xs[-1] = stop
    return np.array(xs)


def _graded_points(p0: np.ndarray, p1: np.ndarray, h0: float, h1: float) -> np.ndarray:
    """Points from p0 to p1 (both included) with spacing growing linearly from h0 to h1."""
    length = float(np.linalg.norm(p1 - p0))
    positions = [0.0]
    while positions[-1] < length:
        s = positions[-1]
        positions.append(s + h0 + (h1 - h0) * min(s / length, 1.0))
    positions = np.array(positions) * (length / positions[-1])
    return p0 + np.outer(positions / length, p1 - p0)


def _resample_outline(spec: DomainSpec, which: int, t_start: float, t_stop: float, spacing: float) -> np.ndarray:
    t_dense = np.linspace(t_start, t_stop, 4001)
    dense = spec.outline(which, t_dense)
    arclength = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(dense, axis=0), axis=1))])
    n = max(2, math.ceil(arclength[-1] / spacing))
    t = np.interp(np.linspace(0, arclength[-1], n + 1), arclength, t_dense)
    return spec.outline(which, t)


def _gap_block(spec: DomainSpec, profile: GapProfile, grading: MeshGrading):
    """Structured layers over the right half of the gap: nodes, triangles, tags, columns."""
    n = grading.n_layers
    R = spec.gap_window
    if spec.touching:
        xs = _column_positions(spec.eta, R, grading, 0.0)
    else:
        xs = _column_positions(0.0, R, grading, (spec.epsilon / profile.tau) ** (1 / profile.m))
    bottom = profile.h2(xs)
    top = spec.epsilon + profile.h1(xs)
    v = np.linspace(0.0, 1.0, n + 1)
    ys = bottom[:, None] + v[None, :] * (top - bottom)[:, None]
    ys[:, 0], ys[:, -1] = bottom, top
    nodes = np.column_stack([np.repeat(xs, n + 1), ys.reshape(-1)])

    tags = np.full(len(nodes), BoundaryTag.INTERIOR, dtype=np.int8)
    columns = np.arange(len(nodes)).reshape(len(xs), n + 1)
    tags[columns[:, 0]] = BoundaryTag.INCLUSION2
    tags[columns[:, -1]] = BoundaryTag.INCLUSION1
    if spec.touching:
        tags[columns[0, 1:-1]] = BoundaryTag.CUT

    a = columns[:-1, :-1].reshape(-1)
    b = columns[1:, :-1].reshape(-1)
    c = columns[1:, 1:].reshape(-1)
    d = columns[:-1, 1:].reshape(-1)
    triangles = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return nodes, triangles, tags, columns


def _outer_half(spec: DomainSpec, grading: MeshGrading, column: np.ndarray, column_nodes: np.ndarray):
    """Triangulate the right half of Ω outside the gap block.

    `column` holds the block node indices at x₁ = R from bottom to top.
    """
    center = spec.outer_center
    radius = spec.radius
    outer_h = grading.outer_h if grading.outer_h is not None else radius / 8
    max_area = 0.5 * grading.target_h * outer_h
    circle_spacing = math.sqrt(2 * max_area)

    pole1 = np.array([0.0, spec.epsilon + 2 * spec.r1])
    pole2 = np.array([0.0, -2 * spec.r2])
    top = center + np.array([0.0, radius])
    bottom = center - np.array([0.0, radius])

    axis_top = _graded_points(top, pole1, circle_spacing, grading.target_h)[:-1]
    outline1 = _resample_outline(spec, 1, math.pi / 2, spec.window_parameter(1), grading.target_h)[:-1]
    outline1[0] = pole1
    outline2 = _resample_outline(spec, 2, spec.window_parameter(2), -math.pi / 2, grading.target_h)[1:]
    outline2[-1] = pole2
    axis_bottom = _graded_points(pole2, bottom, grading.target_h, circle_spacing)[1:]
    n_arc = max(4, math.ceil(math.pi * radius / circle_spacing))
    angles = np.linspace(-math.pi / 2, math.pi / 2, n_arc + 1)[1:-1]
    arc = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    axis_top[:, 0] = 0.0
    axis_bottom[:, 0] = 0.0

    pieces = [
        (axis_top, BoundaryTag.INTERIOR),
        (outline1, BoundaryTag.INCLUSION1),
        (column_nodes[::-1], None),
        (outline2, BoundaryTag.INCLUSION2),
        (axis_bottom, BoundaryTag.INTERIOR),
        (arc, BoundaryTag.OUTER),
    ]
    vertices = np.concatenate([points for points, _ in pieces])
    tags = np.concatenate(
        [np.full(len(points), -1 if tag is None else tag, dtype=np.int8) for points, tag in pieces]
    )
    tags[0] = BoundaryTag.OUTER
    tags[len(axis_top) + len(outline1) + len(column_nodes) + len(outline2) + len(axis_bottom) - 1] = BoundaryTag.OUTER
    n_vertices = len(vertices)
    segments = np.column_stack([np.arange(n_vertices), (np.arange(n_vertices) + 1) % n_vertices])

    opts = f"pq{grading.min_angle:g}Ya{max_area:.10g}"
    logger.debug(f"Triangulating {n_vertices} boundary vertices with options {opts!r}")
    try:
        result = triangle.triangulate({"vertices": vertices, "segments": segments}, opts)
    except Exception as exc:
        raise MeshError(f"triangle failed: {exc}", stage="mesh") from exc
    out_vertices = np.asarray(result["vertices"], dtype=float)
    if len(out_vertices) < n_vertices or not np.array_equal(out_vertices[:n_vertices], vertices):
        raise MeshError("triangulation reordered the boundary vertices", stage="mesh")

    # map PSLG column vertices onto the block indices
    first_column = len(axis_top) + len(outline1)
    block_index = np.full(len(out_vertices), -1)
    block_index[first_column : first_column + len(column)] = column[::-1]
    all_tags = np.concatenate([tags, np.full(len(out_vertices) - n_vertices, BoundaryTag.INTERIOR, dtype=np.int8)])
    return out_vertices, np.asarray(result["triangles"], dtype=np.int64), all_tags, block_index


def _edge_tag(tag_a: int, tag_b: int) -> int:
    if tag_a == tag_b:
        return tag_a
    pair = {tag_a, tag_b}
    if BoundaryTag.CUT in pair and pair & {BoundaryTag.INCLUSION1, BoundaryTag.INCLUSION2}:
        return BoundaryTag.CUT
    return BoundaryTag.INTERIOR


def boundary_edges(triangles: np.ndarray) -> np.ndarray:
    edges = np.sort(triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    unique, counts = np.unique(edges, axis=0, return_counts=True)
    return unique[counts == 1]


def build_mesh(spec: DomainSpec, profile: GapProfile | None = None, grading: MeshGrading | None = None) -> Mesh:
    """Mesh Ω for ε > 0, or Ω* with the cusp |x₁| < η removed for ε = 0."""
    grading = grading or MeshGrading()
    profile = profile or spec.profile
    if spec.touching and spec.eta is None:
        raise MeshError("the touching configuration needs a cusp cutoff eta", stage="mesh")
    if spec.d != 2 or profile.d != 2:
        raise MeshError("only planar domains are meshed", stage="mesh")

    block_nodes, block_triangles, block_tags, columns = _gap_block(spec, profile, grading)
    column = columns[-1]
    outer_vertices, outer_triangles, outer_tags, block_index = _outer_half(
        spec, grading, column, block_nodes[column]
    )

    # right half: block nodes first, then outer nodes not shared with the block
    fresh = block_index < 0
    index = np.empty(len(outer_vertices), dtype=np.int64)
    index[~fresh] = block_index[~fresh]
    index[fresh] = len(block_nodes) + np.arange(np.count_nonzero(fresh))
    nodes = np.concatenate([block_nodes, outer_vertices[fresh]])
    tags = np.concatenate([block_tags, outer_tags[fresh]])
    triangles = np.concatenate([block_triangles, index[outer_triangles]])
    gap = np.zeros(len(nodes), dtype=bool)
    gap[: len(block_nodes)] = True

    areas = _signed_areas(nodes, triangles)
    triangles[areas < 0] = triangles[areas < 0][:, [0, 2, 1]]

    # mirror x -> -x, sharing the nodes on the axis
    on_axis = nodes[:, 0] == 0.0
    mirror = np.arange(len(nodes))
    mirror[~on_axis] = len(nodes) + np.arange(np.count_nonzero(~on_axis))
    mirrored = nodes[~on_axis] * np.array([-1.0, 1.0])
    nodes = np.concatenate([nodes, mirrored])
    tags = np.concatenate([tags, tags[~on_axis]])
    gap = np.concatenate([gap, gap[~on_axis]])
    triangles = np.concatenate([triangles, mirror[triangles][:, [0, 2, 1]]])

    edges = boundary_edges(triangles)
    edge_tags = np.array([_edge_tag(tags[a], tags[b]) for a, b in edges], dtype=np.int8)
    if np.any(edge_tags == BoundaryTag.INTERIOR):
        raise MeshError("boundary edge with an interior node; the outline and the gap block do not match", "mesh")

    mesh = Mesh(
        nodes=nodes,
        triangles=triangles,
        node_tags=tags,
        boundary_edges=edges,
        edge_tags=edge_tags,
        gap_nodes=gap,
        epsilon=spec.epsilon,
        eta=spec.eta if spec.touching else None,
        n_layers=grading.n_layers,
        window=spec.gap_window,
    )
    _check_quality(mesh, grading)
    mesh.stats.update(mesh_statistics(mesh))
    logger.info(
        f"Mesh for epsilon={spec.epsilon:g}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles, "
        f"{int(gap.sum())} gap nodes, max aspect {mesh.stats['max_aspect']:.3g}"
    )
    return mesh


def _signed_areas(nodes: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a, b, c = (nodes[triangles[:, k]] for k in range(3))
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def _check_quality(mesh: Mesh, grading: MeshGrading):
    areas = mesh.signed_areas()
    if np.any(areas <= 0):
        raise MeshError(f"{int(np.sum(areas <= 0))} inverted or degenerate elements", stage="mesh")
    worst = float(np.max(mesh.aspect_ratios()))
    if worst > grading.max_aspect:
        raise MeshError(f"aspect ratio {worst:.3g} exceeds the limit {grading.max_aspect:.3g}", stage="mesh")
    if worst > 0.5 * grading.max_aspect:
        logger.warning(f"Aspect ratio {worst:.3g} is close to the limit {grading.max_aspect:.3g}")


def mesh_statistics(mesh: Mesh) -> dict:
    aspects = mesh.aspect_ratios()
    return {
        "nodes": mesh.n_nodes,
        "triangles": mesh.n_triangles,
        "gap_nodes": int(np.count_nonzero(mesh.gap_nodes)),
        "outside_gap_nodes": int(np.count_nonzero(~mesh.gap_nodes)),
        "max_aspect": float(np.max(aspects)),
        "min_area": float(np.min(np.abs(mesh.signed_areas()))),
        "boundary_edges": len(mesh.boundary_edges),
    }


def gap_crossings(mesh: Mesh, profile: GapProfile, x1: float, rtol: float = 1e-9) -> int:
    """Number of gap elements crossed by the vertical line through x₁."""
    corners = mesh.nodes[mesh.triangles]
    xs, ys = corners[..., 0], corners[..., 1]
    in_window = np.all(np.abs(xs) <= mesh.window * (1 + rtol), axis=1)
    spans = (xs.min(axis=1) < x1) & (x1 < xs.max(axis=1)) & in_window
    candidates = np.flatnonzero(spans)
    if len(candidates) == 0:
        return 0
    cx, cy = xs[candidates], ys[candidates]
    lower = profile.h2(cx)
    upper = mesh.epsilon + profile.h1(cx)
    slack = rtol * (1 + np.abs(upper - lower))
    inside = np.all((cy >= lower - slack) & (cy <= upper + slack), axis=1)
    return int(np.count_nonzero(inside))


def boundary_deviation(mesh: Mesh, spec: DomainSpec) -> dict[str, float]:
    """Largest residual of the implicit boundary equations over the tagged nodes."""
    result = {}
    for name, tag, which in (("inclusion1", BoundaryTag.INCLUSION1, 1), ("inclusion2", BoundaryTag.INCLUSION2, 2)):
        points = mesh.nodes[mesh.tagged_nodes(tag)]
        radius, center = (spec.r1, spec.center1) if which == 1 else (spec.r2, spec.center2)
        level = (np.abs(points[:, 0]) / radius) ** spec.m + (np.abs(points[:, 1] - center) / radius) ** spec.m
        result[name] = float(np.max(np.abs(level - 1))) if len(points) else 0.0
    outer = mesh.nodes[mesh.tagged_nodes(BoundaryTag.OUTER)]
    result["outer"] = float(np.max(np.abs(np.linalg.norm(outer - spec.outer_center, axis=1) - spec.radius)))
    return result


MESH_FORMAT = "lamegap-mesh 1"


def write_mesh(mesh: Mesh, path: Path | str):
    """Plain-text mesh: header, then node, triangle and boundary-edge tables."""
    path = Path(path)
    lines = [
        f"# {MESH_FORMAT}",
        f"epsilon {float(mesh.epsilon)!r}",
        f"eta {None if mesh.eta is None else float(mesh.eta)!r}",
        f"n_layers {mesh.n_layers}",
        f"window {float(mesh.window)!r}",
        f"quadrature_order {mesh.quadrature_order}",
        f"nodes {mesh.n_nodes}",
    ]
    lines += [
        f"{x:.17g} {y:.17g} {tag} {int(gap)}"
        for (x, y), tag, gap in zip(mesh.nodes, mesh.node_tags, mesh.gap_nodes)
    ]
    lines.append(f"triangles {mesh.n_triangles}")
    lines += [f"{a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"boundary_edges {len(mesh.boundary_edges)}")
    lines += [f"{a} {b} {tag}" for (a, b), tag in zip(mesh.boundary_edges, mesh.edge_tags)]
    path.write_text("\n".join(lines) + "\n")


def read_mesh(path: Path | str) -> Mesh:
    lines = [line for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or lines[0] != f"# {MESH_FORMAT}":
        raise MeshError(f"{path} is not a lamegap mesh file", stage="mesh-io")
    header = {}
    cursor = 1
    while not lines[cursor].startswith("nodes "):
        key, value = lines[cursor].split(maxsplit=1)
        header[key] = value
        cursor += 1

    def table(name: str, dtype) -> np.ndarray:
        nonlocal cursor
        key, count = lines[cursor].split()
        if key != name:
            raise MeshError(f"expected table {name!r}, found {key!r}", stage="mesh-io")
        count = int(count)
        rows = [line.split() for line in lines[cursor + 1 : cursor + 1 + count]]
        cursor += count + 1
        return np.array(rows, dtype=dtype).reshape(count, -1)

    node_table = table("nodes", float)
    triangles = table("triangles", np.int64)
    edge_table = table("boundary_edges", np.int64)
    eta = None if header["eta"] == "None" else float(header["eta"])
    return Mesh(
        nodes=node_table[:, :2],
        triangles=triangles,
        node_tags=node_table[:, 2].astype(np.int8),
        boundary_edges=edge_table[:, :2],
        edge_tags=edge_table[:, 2].astype(np.int8),
        gap_nodes=node_table[:, 3].astype(bool),
        epsilon=float(header["epsilon"]),
        eta=eta,
        n_layers=int(header["n_layers"]),
        window=float(header["window"]),
        quadrature_order=int(header["quadrature_order"]),
    )
