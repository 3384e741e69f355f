from .domain import DomainSpec, superellipse_point
from .mesh import (
    BoundaryTag,
    Mesh,
    MeshGrading,
    boundary_deviation,
    build_mesh,
    gap_crossings,
    mesh_statistics,
    read_mesh,
    write_mesh,
)
from .profiles import (
    CallableProfile,
    CurvilinearSquareProfile,
    GapProfile,
    GapRegion,
    PowerProfile,
    as_prime,
    curvilinear_square_profile,
    delta,
    omega_t,
    power_profile,
    squares_tau,
)

__all__ = [
    "BoundaryTag",
    "CallableProfile",
    "CurvilinearSquareProfile",
    "DomainSpec",
    "GapProfile",
    "GapRegion",
    "Mesh",
    "MeshGrading",
    "PowerProfile",
    "as_prime",
    "boundary_deviation",
    "build_mesh",
    "curvilinear_square_profile",
    "delta",
    "gap_crossings",
    "mesh_statistics",
    "omega_t",
    "power_profile",
    "read_mesh",
    "squares_tau",
    "superellipse_point",
    "write_mesh",
]
