from .dump import factor_frame, read_factors, write_factors
from .matrices import (
    DET_THRESHOLD,
    CoefficientExpansion,
    Determinant,
    FactorMatrices,
    assemble_matrices,
    coeff_expansion,
    determinant,
    matrix_layout,
)
from .cusp import RegularEnergy, regular_energy
from .squares import (
    GeometryConstants,
    example_squares_expansion,
    gap_integral,
    profile_correction,
    squares_gap,
    squares_geometry_constants,
    strict_convex_expansion,
    strict_convex_geometry_constant,
    tail_term,
)
from .starred import Regime, StarredQuantities, divergent_mask, diverges, regime_of, starred_quantities

__all__ = [
    "DET_THRESHOLD",
    "CoefficientExpansion",
    "Determinant",
    "FactorMatrices",
    "GeometryConstants",
    "Regime",
    "RegularEnergy",
    "StarredQuantities",
    "assemble_matrices",
    "coeff_expansion",
    "determinant",
    "divergent_mask",
    "diverges",
    "example_squares_expansion",
    "factor_frame",
    "gap_integral",
    "matrix_layout",
    "profile_correction",
    "read_factors",
    "regime_of",
    "regular_energy",
    "squares_gap",
    "squares_geometry_constants",
    "starred_quantities",
    "strict_convex_expansion",
    "strict_convex_geometry_constant",
    "tail_term",
    "write_factors",
]
