from .core import LameParameters, RigidMotionBasis, quadratic_form, rigid_basis, stiffness_apply, symmetric_part

__all__ = [
    "LameParameters",
    "RigidMotionBasis",
    "quadratic_form",
    "rigid_basis",
    "stiffness_apply",
    "symmetric_part",
]
