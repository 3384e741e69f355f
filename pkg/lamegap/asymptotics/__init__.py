from .constants import ConstantsBundle, constants, gamma_bracket, lame_factors, unit_ball_volume
from .fields import (
    BoundaryField,
    GapFrame,
    aux_grad_u1,
    aux_grad_u1_parts,
    aux_grad_u2,
    aux_u1,
    aux_u2,
    correction_factors,
    correction_field,
    f_profile,
    gap_frame,
    general_aux_grad_v,
    general_aux_v,
    keller_grad_v,
    keller_v,
    residual_scale,
)
from .rates import (
    Location,
    RemainderKind,
    b_convergence_exponent,
    coefficient_exponent,
    energy_exponent,
    expansion_remainder,
    predicted_exponent,
    remainder_order,
    rho,
    rho_d,
    rho_exponent,
)

__all__ = [
    "BoundaryField",
    "ConstantsBundle",
    "GapFrame",
    "Location",
    "RemainderKind",
    "aux_grad_u1",
    "aux_grad_u1_parts",
    "aux_grad_u2",
    "aux_u1",
    "aux_u2",
    "b_convergence_exponent",
    "coefficient_exponent",
    "constants",
    "correction_factors",
    "correction_field",
    "energy_exponent",
    "expansion_remainder",
    "f_profile",
    "gamma_bracket",
    "gap_frame",
    "general_aux_grad_v",
    "general_aux_v",
    "keller_grad_v",
    "keller_v",
    "lame_factors",
    "predicted_exponent",
    "remainder_order",
    "residual_scale",
    "rho",
    "rho_d",
    "rho_exponent",
    "unit_ball_volume",
]
