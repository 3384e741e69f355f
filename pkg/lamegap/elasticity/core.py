"""Isotropic stiffness tensor and the rigid displacement basis."""

import logging
from functools import cached_property
from itertools import combinations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)


class LameParameters(BaseModel):
    """Lamé constants of the matrix material.

    Strong ellipticity requires `mu > 0` and `d * lam + 2 * mu > 0`. When `kappa3` is
    supplied, the box `kappa3 <= mu` and `d * lam + 2 * mu <= 1 / kappa3` is enforced too.
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lam: float = Field(alias="lambda", description="First Lamé constant λ")
    mu: float = Field(description="Shear modulus μ")
    d: int = Field(2, ge=2, description="Space dimension")
    kappa3: float | None = Field(None, gt=0, description="Optional bound constant κ₃")

    @model_validator(mode="after")
    def check_ellipticity(self):
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        bulk = self.d * self.lam + 2 * self.mu
        if bulk <= 0:
            raise ValueError(f"d*lambda + 2*mu must be positive, got {bulk}")
        if self.kappa3 is not None and not (self.kappa3 <= self.mu and bulk <= 1 / self.kappa3):
            raise ValueError(
                f"parameters violate the kappa3 box: kappa3={self.kappa3}, mu={self.mu}, d*lambda+2*mu={bulk}"
            )
        return self

    @property
    def ellipticity_bounds(self) -> tuple[float, float]:
        """(lower, upper) constants of (ℂ⁰ξ, ξ) relative to |ξ|² on symmetric ξ."""
        values = (2 * self.mu, self.d * self.lam + 2 * self.mu)
        return min(values), max(values)

    def tensor(self) -> np.ndarray:
        """Materialize C⁰_{ijkl} = λ δ_ij δ_kl + μ (δ_ik δ_jl + δ_il δ_jk)."""
        eye = np.eye(self.d)
        return (
            self.lam * np.einsum("ij,kl->ijkl", eye, eye)
            + self.mu * (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye))
        )


def _check_square(params: LameParameters, xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-2:] != (params.d, params.d):
        raise ValueError(f"expected trailing shape ({params.d}, {params.d}), got {xi.shape}")
    return xi


def stiffness_apply(params: LameParameters, xi: np.ndarray) -> np.ndarray:
    """ℂ⁰ξ = λ tr(ξ) I + μ (ξ + ξᵀ). Broadcasts over leading axes."""
    xi = _check_square(params, xi)
    trace = np.trace(xi, axis1=-2, axis2=-1)
    return params.lam * trace[..., None, None] * np.eye(params.d) + params.mu * (xi + np.swapaxes(xi, -1, -2))


def quadratic_form(params: LameParameters, xi: np.ndarray, atol: float = 1e-12) -> np.ndarray | float:
    """(ℂ⁰ξ, ξ) for symmetric ξ."""
    xi = _check_square(params, xi)
    if not np.allclose(xi, np.swapaxes(xi, -1, -2), atol=atol, rtol=0):
        raise ValueError("quadratic_form expects a symmetric matrix")
    value = np.sum(stiffness_apply(params, xi) * xi, axis=(-2, -1))
    return float(value) if np.ndim(value) == 0 else value


class RigidMotionBasis(BaseModel):
    """Ordered basis ψ_α of the rigid displacements in ℝ^d.

    ψ_α = e_α for α ≤ d, ψ_α = x_d e_{α−d} − x_{α−d} e_d for d < α < 2d, and for α ≥ 2d
    the remaining planar rotations, one per pair (i, j) with i < j < d in lexicographic order.
    Indices in `pairs` are 1-based like α.
    """

    model_config = ConfigDict(frozen=True)

    d: int = Field(ge=2)

    @property
    def size(self) -> int:
        return self.d * (self.d + 1) // 2

    @cached_property
    def pairs(self) -> list[tuple[int, int]]:
        return list(combinations(range(1, self.d), 2))

    @cached_property
    def matrices(self) -> np.ndarray:
        """Affine representation ψ_α(x) = A_α x + c_α; returns A with shape (N, d, d)."""
        d = self.d
        A = np.zeros((self.size, d, d))
        for alpha in range(d + 1, 2 * d):
            k = alpha - d - 1
            A[alpha - 1, k, d - 1] = 1.0
            A[alpha - 1, d - 1, k] = -1.0
        for offset, (i, j) in enumerate(self.pairs):
            alpha = 2 * d + offset
            A[alpha - 1, i - 1, j - 1] = 1.0
            A[alpha - 1, j - 1, i - 1] = -1.0
        return A

    @cached_property
    def offsets(self) -> np.ndarray:
        c = np.zeros((self.size, self.d))
        c[: self.d] = np.eye(self.d)
        return c

    def check_index(self, alpha: int):
        if not 1 <= alpha <= self.size:
            raise ValueError(f"alpha must lie in 1..{self.size}, got {alpha}")

    def is_translation(self, alpha: int) -> bool:
        self.check_index(alpha)
        return alpha <= self.d

    def evaluate(self, alpha: int, x: np.ndarray) -> np.ndarray:
        """ψ_α at points x of shape (..., d)."""
        self.check_index(alpha)
        x = np.asarray(x, dtype=float)
        return x @ self.matrices[alpha - 1].T + self.offsets[alpha - 1]

    def gradient(self, alpha: int) -> np.ndarray:
        """Constant gradient (∂ψ_i/∂x_j) of ψ_α; skew-symmetric."""
        self.check_index(alpha)
        return self.matrices[alpha - 1].copy()

    def evaluation_matrix(self, points: np.ndarray) -> np.ndarray:
        """Stack of ψ_α(p) over sample points: shape (n_points * d, N)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        columns = [self.evaluate(alpha, points).reshape(-1) for alpha in range(1, self.size + 1)]
        return np.column_stack(columns)

    def evaluation_rank(self, points: np.ndarray) -> int:
        return int(np.linalg.matrix_rank(self.evaluation_matrix(points)))


def rigid_basis(d: int) -> RigidMotionBasis:
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    return RigidMotionBasis(d=d)


def symmetric_part(grad: np.ndarray) -> np.ndarray:
    """e(u) = (∇u + ∇uᵀ)/2 along the trailing two axes."""
    return 0.5 * (grad + np.swapaxes(grad, -1, -2))
