from .assembly import assemble_stiffness, element_stiffness
from .dump import read_solution, solution_frame, write_solution
from .functionals import SubproblemSet, compute_a, compute_b, inclusion_data, nodal_lift, outer_data, solve_subproblems
from .limit import (
    BlockMatrices,
    CoefficientSolution,
    block_matrices,
    flux_moments,
    reconstruct,
    solve_coefficients,
    solve_limit_problem,
)
from .solver import (
    DirichletData,
    ElasticityProblem,
    FieldSolution,
    SolverOptions,
    cell_gradients,
    energy_inner,
    gradient_at,
    solve_dirichlet,
    zero_field,
)
from .space import DEGREE5_RULE, EDGE_MIDPOINT_RULE, QUADRATURE, P2Space, QuadratureRule, p2_space

__all__ = [
    "BlockMatrices",
    "CoefficientSolution",
    "DEGREE5_RULE",
    "DirichletData",
    "EDGE_MIDPOINT_RULE",
    "ElasticityProblem",
    "FieldSolution",
    "P2Space",
    "QUADRATURE",
    "QuadratureRule",
    "SolverOptions",
    "SubproblemSet",
    "assemble_stiffness",
    "block_matrices",
    "cell_gradients",
    "compute_a",
    "compute_b",
    "element_stiffness",
    "energy_inner",
    "flux_moments",
    "gradient_at",
    "inclusion_data",
    "nodal_lift",
    "outer_data",
    "p2_space",
    "read_solution",
    "reconstruct",
    "solution_frame",
    "solve_coefficients",
    "solve_dirichlet",
    "solve_limit_problem",
    "write_solution",
    "zero_field",
]
