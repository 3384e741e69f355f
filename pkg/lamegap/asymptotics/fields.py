"""Explicit fields of the thin gap: the Keller function v̄, the correction terms ℱ_α and
the auxiliary fields ū₁^α, ū₂^α, ṽ together with their analytic gradients.

Points are arrays of shape (..., d) inside the chart Ω_{2R}. Gradients are returned as
(..., d, d) arrays with entry [i, k] = ∂u_i/∂x_k.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from lamegap.elasticity import LameParameters, RigidMotionBasis, rigid_basis
from lamegap.errors import ChartError
from lamegap.geometry import GapProfile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GapFrame:
    """Pointwise gap quantities at a batch of chart points."""

    x: np.ndarray
    delta: np.ndarray
    vbar: np.ndarray
    grad_vbar: np.ndarray
    grad_delta: np.ndarray
    hess_delta: np.ndarray


def gap_frame(profile: GapProfile, epsilon: float, x) -> GapFrame:
    x = np.asarray(x, dtype=float)
    d = profile.d
    if x.shape[-1] != d:
        raise ValueError(f"expected points with {d} coordinates, got shape {x.shape}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    xp = profile.check_chart(x[..., : d - 1])
    h2 = profile.h2(xp)
    delta = epsilon + profile.h1(xp) - h2
    if np.any(delta <= 0):
        raise ChartError("the gap closes at the contact point; evaluate away from x' = 0")
    vbar = (x[..., d - 1] - h2) / delta
    grad_delta = profile.grad_gap(xp)
    grad_vbar = np.empty(x.shape)
    grad_vbar[..., : d - 1] = -(profile.grad_h2(xp) + vbar[..., None] * grad_delta) / delta[..., None]
    grad_vbar[..., d - 1] = 1 / delta
    return GapFrame(
        x=x,
        delta=delta,
        vbar=vbar,
        grad_vbar=grad_vbar,
        grad_delta=grad_delta,
        hess_delta=profile.hess_gap(xp),
    )


def keller_v(profile: GapProfile, epsilon: float, x) -> np.ndarray:
    """v̄ = (x_d − h₂(x′))/δ(x′): 1 on Γ⁺, 0 on Γ⁻."""
    return gap_frame(profile, epsilon, x).vbar


def keller_grad_v(profile: GapProfile, epsilon: float, x) -> np.ndarray:
    return gap_frame(profile, epsilon, x).grad_vbar


def f_profile(vbar) -> tuple[np.ndarray, np.ndarray]:
    """f(v̄) = ½(v̄ − ½)² − ⅛ and f′(v̄) = v̄ − ½."""
    vbar = np.asarray(vbar, dtype=float)
    return 0.5 * (vbar - 0.5) ** 2 - 0.125, vbar - 0.5


def correction_factors(params: LameParameters) -> tuple[float, float]:
    """(λ+μ)/μ and (λ+μ)/(λ+2μ)."""
    lam, mu = params.lam, params.mu
    return (lam + mu) / mu, (lam + mu) / (lam + 2 * mu)


def _padded(frame: GapFrame) -> tuple[np.ndarray, np.ndarray]:
    d = frame.x.shape[-1]
    grad = np.zeros(frame.x.shape)
    grad[..., : d - 1] = frame.grad_delta
    hess = np.zeros(frame.x.shape + (d,))
    hess[..., : d - 1, : d - 1] = frame.hess_delta
    return grad, hess


def correction(P: np.ndarray, JP: np.ndarray, frame: GapFrame, params: LameParameters):
    """Direction g of the correction f·g and its Jacobian, for a vector field P with Jacobian JP.

    g = c₁ P_d (∇′δ, 0) + c₂ (P′·∇′δ) e_d.
    """
    c1, c2 = correction_factors(params)
    grad, hess = _padded(frame)
    d = P.shape[-1]
    g = np.empty(P.shape)
    g[..., : d - 1] = c1 * P[..., d - 1, None] * grad[..., : d - 1]
    g[..., d - 1] = c2 * np.sum(P * grad, axis=-1)
    Jg = np.empty(P.shape + (d,))
    Jg[..., : d - 1, :] = c1 * (
        grad[..., : d - 1, None] * JP[..., d - 1, None, :] + P[..., d - 1, None, None] * hess[..., : d - 1, :]
    )
    Jg[..., d - 1, :] = c2 * (np.einsum("...i,...ik->...k", grad, JP) + np.einsum("...i,...ik->...k", P, hess))
    return g, Jg


def _check(params: LameParameters, profile: GapProfile, basis: RigidMotionBasis, alpha: int):
    if params.d != profile.d:
        raise ValueError(f"material dimension {params.d} differs from profile dimension {profile.d}")
    if not profile.has_derivatives:
        raise ValueError("correction fields need a profile with analytic derivatives")
    basis.check_index(alpha)


def correction_field(alpha: int, profile: GapProfile, epsilon: float, params: LameParameters, x) -> np.ndarray:
    """ℱ_α = f(v̄)·g_α."""
    basis = rigid_basis(profile.d)
    _check(params, profile, basis, alpha)
    frame = gap_frame(profile, epsilon, x)
    P = basis.evaluate(alpha, frame.x)
    JP = np.broadcast_to(basis.gradient(alpha), P.shape + (profile.d,))
    g, _ = correction(P, JP, frame, params)
    f, _ = f_profile(frame.vbar)
    return f[..., None] * g


def aux_u1(alpha: int, profile: GapProfile, epsilon: float, params: LameParameters, x) -> np.ndarray:
    """ū₁^α = ψ_α v̄ + ℱ_α: equals ψ_α on Γ⁺ and 0 on Γ⁻."""
    basis = rigid_basis(profile.d)
    _check(params, profile, basis, alpha)
    frame = gap_frame(profile, epsilon, x)
    P = basis.evaluate(alpha, frame.x)
    JP = np.broadcast_to(basis.gradient(alpha), P.shape + (profile.d,))
    g, _ = correction(P, JP, frame, params)
    f, _ = f_profile(frame.vbar)
    return P * frame.vbar[..., None] + f[..., None] * g


def aux_u2(alpha: int, profile: GapProfile, epsilon: float, params: LameParameters, x) -> np.ndarray:
    """ū₂^α = ψ_α(1 − v̄) − ℱ_α."""
    x = np.asarray(x, dtype=float)
    return rigid_basis(profile.d).evaluate(alpha, x) - aux_u1(alpha, profile, epsilon, params, x)


def aux_grad_u1_parts(
    alpha: int, profile: GapProfile, epsilon: float, params: LameParameters, x
) -> tuple[np.ndarray, np.ndarray]:
    """∇ū₁^α split as (ψ_α ⊗ e_d/δ, remainder).

    The first part carries the 1/δ blow-up; the remainder stays bounded by |∇′δ|/δ-size terms
    and is returned separately so energy densities can be formed without cancellation.
    """
    basis = rigid_basis(profile.d)
    _check(params, profile, basis, alpha)
    frame = gap_frame(profile, epsilon, x)
    d = profile.d
    P = basis.evaluate(alpha, frame.x)
    A = basis.gradient(alpha)
    JP = np.broadcast_to(A, P.shape + (d,))
    g, Jg = correction(P, JP, frame, params)
    f, fprime = f_profile(frame.vbar)

    big = np.zeros(P.shape + (d,))
    big[..., :, d - 1] = P / frame.delta[..., None]
    tangential = frame.grad_vbar.copy()
    tangential[..., d - 1] = 0.0
    rest = (
        np.einsum("...i,...k->...ik", P, tangential)
        + frame.vbar[..., None, None] * A
        + fprime[..., None, None] * np.einsum("...i,...k->...ik", g, frame.grad_vbar)
        + f[..., None, None] * Jg
    )
    return big, rest


def aux_grad_u1(alpha: int, profile: GapProfile, epsilon: float, params: LameParameters, x) -> np.ndarray:
    big, rest = aux_grad_u1_parts(alpha, profile, epsilon, params, x)
    return big + rest


def aux_grad_u2(alpha: int, profile: GapProfile, epsilon: float, params: LameParameters, x) -> np.ndarray:
    return rigid_basis(profile.d).gradient(alpha) - aux_grad_u1(alpha, profile, epsilon, params, x)


@dataclass(frozen=True)
class BoundaryField:
    """A vector field prescribed on an inclusion boundary, extended to the whole space.

    `jacobian` is needed for gradients and `c2_norm` for the residual scale.
    """

    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    c2_norm: float | None = None

    @classmethod
    def affine(cls, matrix, offset=None, c2_norm: float | None = None) -> "BoundaryField":
        matrix = np.asarray(matrix, dtype=float)
        offset = np.zeros(matrix.shape[0]) if offset is None else np.asarray(offset, dtype=float)
        return cls(
            value=lambda x: np.asarray(x, dtype=float) @ matrix.T + offset,
            jacobian=lambda x: np.broadcast_to(matrix, np.shape(x)[:-1] + matrix.shape),
            c2_norm=c2_norm,
        )

    @classmethod
    def quadratic(cls, matrix, offset, tensor, center=None) -> "BoundaryField":
        """A y + b + Q[y, y] with y = x − center, i.e. φᵢ = Σ Aᵢⱼyⱼ + bᵢ + Σ Qᵢⱼₖyⱼyₖ."""
        matrix = np.asarray(matrix, dtype=float)
        offset = np.asarray(offset, dtype=float)
        tensor = np.asarray(tensor, dtype=float)
        center = np.zeros(matrix.shape[1]) if center is None else np.asarray(center, dtype=float)
        symmetric = tensor + np.swapaxes(tensor, 1, 2)

        def value(x):
            y = np.asarray(x, dtype=float) - center
            return y @ matrix.T + offset + np.einsum("ijk,...j,...k->...i", tensor, y, y)

        def jacobian(x):
            y = np.asarray(x, dtype=float) - center
            return matrix + np.einsum("ijk,...k->...ij", symmetric, y)

        return cls(value=value, jacobian=jacobian)

    @classmethod
    def constant(cls, vector) -> "BoundaryField":
        vector = np.asarray(vector, dtype=float)
        return cls.affine(np.zeros((len(vector), len(vector))), vector, c2_norm=float(np.linalg.norm(vector)))

    @classmethod
    def rigid(cls, alpha: int, d: int, c2_norm: float | None = None) -> "BoundaryField":
        basis = rigid_basis(d)
        return cls.affine(basis.gradient(alpha), basis.offsets[alpha - 1], c2_norm=c2_norm)

    @classmethod
    def zero(cls, d: int) -> "BoundaryField":
        return cls.constant(np.zeros(d))

    def require_jacobian(self) -> Callable:
        if self.jacobian is None:
            raise ValueError("boundary field has no derivative data")
        return self.jacobian


def _boundary_traces(psi: BoundaryField, phi: BoundaryField, profile: GapProfile, epsilon: float, xp, with_grad: bool):
    """Δ(x′) = ψ(x′, ε + h₁(x′)) − φ(x′, h₂(x′)), φ's trace, and optionally their x′-gradients."""
    d = profile.d
    upper = np.concatenate([xp, (epsilon + profile.h1(xp))[..., None]], axis=-1)
    lower = np.concatenate([xp, profile.h2(xp)[..., None]], axis=-1)
    trace_psi = np.asarray(psi.value(upper), dtype=float)
    trace_phi = np.asarray(phi.value(lower), dtype=float)
    if not with_grad:
        return trace_psi - trace_phi, trace_phi, None, None
    J_psi = np.asarray(psi.require_jacobian()(upper), dtype=float)
    J_phi = np.asarray(phi.require_jacobian()(lower), dtype=float)
    grad_psi = J_psi[..., : d - 1] + J_psi[..., :, d - 1, None] * profile.grad_h1(xp)[..., None, :]
    grad_phi = J_phi[..., : d - 1] + J_phi[..., :, d - 1, None] * profile.grad_h2(xp)[..., None, :]
    return trace_psi - trace_phi, trace_phi, grad_psi - grad_phi, grad_phi


def _pad_tangential(grad_prime: np.ndarray) -> np.ndarray:
    d = grad_prime.shape[-1] + 1
    out = np.zeros(grad_prime.shape[:-1] + (d,))
    out[..., : d - 1] = grad_prime
    return out


def general_aux_v(
    psi: BoundaryField, phi: BoundaryField, profile: GapProfile, epsilon: float, params: LameParameters, x
) -> np.ndarray:
    """ṽ for data ψ on ∂D₁ and φ on ∂D₂, both taken at the boundary points above and below x′."""
    frame = gap_frame(profile, epsilon, x)
    d = profile.d
    xp = frame.x[..., : d - 1]
    jump, trace_phi, _, _ = _boundary_traces(psi, phi, profile, epsilon, xp, with_grad=False)
    zeros = np.zeros(jump.shape + (d,))
    g, _ = correction(jump, zeros, frame, params)
    f, _ = f_profile(frame.vbar)
    return trace_phi + jump * frame.vbar[..., None] + f[..., None] * g


def general_aux_grad_v(
    psi: BoundaryField, phi: BoundaryField, profile: GapProfile, epsilon: float, params: LameParameters, x
) -> np.ndarray:
    frame = gap_frame(profile, epsilon, x)
    d = profile.d
    xp = frame.x[..., : d - 1]
    jump, _, grad_jump, grad_phi = _boundary_traces(psi, phi, profile, epsilon, xp, with_grad=True)
    J_jump = _pad_tangential(grad_jump)
    g, Jg = correction(jump, J_jump, frame, params)
    f, fprime = f_profile(frame.vbar)
    return (
        _pad_tangential(grad_phi)
        + np.einsum("...i,...k->...ik", jump, frame.grad_vbar)
        + frame.vbar[..., None, None] * J_jump
        + fprime[..., None, None] * np.einsum("...i,...k->...ik", g, frame.grad_vbar)
        + f[..., None, None] * Jg
    )


def residual_scale(
    psi: BoundaryField,
    phi: BoundaryField,
    profile: GapProfile,
    epsilon: float,
    xprime,
    norms: tuple[float, float] | None = None,
) -> np.ndarray:
    """|Δ|δ^{(m−2)/m} + δ(‖ψ‖_{C²} + ‖φ‖_{C²}) + |∇_{x′}Δ| with Δ the jump of the boundary data."""
    xp = profile.check_chart(xprime)
    if norms is None:
        if psi.c2_norm is None or phi.c2_norm is None:
            raise ValueError("residual scale needs the C2 norms of both boundary fields")
        norms = (psi.c2_norm, phi.c2_norm)
    delta = epsilon + profile.gap(xp)
    jump, _, grad_jump, _ = _boundary_traces(psi, phi, profile, epsilon, xp, with_grad=True)
    return (
        np.linalg.norm(jump, axis=-1) * delta ** ((profile.m - 2) / profile.m)
        + delta * (norms[0] + norms[1])
        + np.linalg.norm(grad_jump, axis=(-2, -1))
    )
