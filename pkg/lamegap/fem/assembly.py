import logging

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from lamegap.elasticity import LameParameters

from .space import QUADRATURE, P2Space, QuadratureRule, shape_gradients

logger = logging.getLogger(__name__)


def element_stiffness(space: P2Space, params: LameParameters, rule: QuadratureRule | None = None) -> np.ndarray:
    """Local matrices (n_cells, 12, 12) of ∫(ℂ⁰e(u), e(v)), rows and columns ordered (node, component)."""
    if params.d != 2:
        raise ValueError(f"finite elements are planar; got a material with d = {params.d}")
    rule = rule or QUADRATURE[space.mesh.quadrature_order]
    n = len(space.cells)
    eye = np.eye(2)
    Ke = np.zeros((n, 6, 2, 6, 2))
    for bary, weight in zip(rule.points, rule.weights):
        dN = shape_gradients(bary, space.grad_bary)
        dot = np.einsum("eak,ebk->eab", dN, dN)
        Ke += (weight * space.areas)[:, None, None, None, None] * (
            params.lam * np.einsum("eai,ebj->eaibj", dN, dN)
            + params.mu * np.einsum("eaj,ebi->eaibj", dN, dN)
            + params.mu * dot[:, :, None, :, None] * eye[None, None, :, None, :]
        )
    return Ke.reshape(n, 12, 12)


def assemble_stiffness(space: P2Space, params: LameParameters) -> csr_matrix:
    Ke = element_stiffness(space, params)
    dofs = space.cell_dofs
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    K = coo_matrix((Ke.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)).tocsr()
    logger.debug(f"assembled stiffness: {space.n_dofs} dofs, {K.nnz} nonzeros")
    return K
