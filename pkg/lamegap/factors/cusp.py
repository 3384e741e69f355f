"""Regular part of the divergent touching energies.

On Ω* the principal energy a*₁₁^{αα}(η) grows without bound as the cutoff η shrinks, and a
mesh of the cusp resolves the growing part only to a fixed relative accuracy. The field is
split as v₁^{*α} = g + w with g = χ ū₁^{*α}, where χ(x₁) equals 1 on |x₁| ≤ R/2 and
vanishes beyond the gap window R. The energy of g is integrated across the exact gap with
its singular part 𝓛∫w(x₁)/(h₁−h₂) removed; only the bounded field w is solved for.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from lamegap.asymptotics import aux_grad_u1, aux_u1, lame_factors
from lamegap.elasticity import LameParameters, rigid_basis
from lamegap.fem import DEGREE5_RULE, DirichletData, ElasticityProblem, inclusion_data
from lamegap.fem.space import shape_gradients
from lamegap.geometry import GapProfile

logger = logging.getLogger(__name__)

GAUSS_POINTS = 8


def gap_weight_power(alpha: int) -> int:
    """Power p of the weight |x₁|^p in the singular part: 0 for translations, 2 for the rotation."""
    if alpha not in (1, 2, 3):
        raise ValueError(f"alpha must lie in 1..3, got {alpha}")
    return 0 if alpha <= 2 else 2


def cutoff(x1, window: float) -> tuple[np.ndarray, np.ndarray]:
    """C² step χ(|x₁|) and its derivative in x₁; χ = 1 on |x₁| ≤ R/2 and 0 on |x₁| ≥ R."""
    x1 = np.asarray(x1, dtype=float)
    half = window / 2
    s = np.clip((np.abs(x1) - half) / half, 0.0, 1.0)
    chi = 1 - s**3 * (10 - 15 * s + 6 * s**2)
    slope = -30 * s**2 * (1 - s) ** 2 * np.sign(x1) / half
    return chi, slope


def singular_field(
    alpha: int, profile: GapProfile, params: LameParameters, window: float, x
) -> tuple[np.ndarray, np.ndarray]:
    """g = χ ū₁^{*α} and ∇g (entry [i, k] = ∂gᵢ/∂x_k) at points (..., 2) of the gap."""
    x = np.asarray(x, dtype=float)
    chi, slope = cutoff(x[..., 0], window)
    u = aux_u1(alpha, profile, 0.0, params, x)
    grad = chi[..., None, None] * aux_grad_u1(alpha, profile, 0.0, params, x)
    grad[..., 0] += u * slope[..., None]
    return chi[..., None] * u, grad


def _strain(grad: np.ndarray) -> np.ndarray:
    return 0.5 * (grad + np.swapaxes(grad, -1, -2))


def _stress(grad: np.ndarray, params: LameParameters) -> np.ndarray:
    strain = _strain(grad)
    trace = np.trace(strain, axis1=-2, axis2=-1)
    return params.lam * trace[..., None, None] * np.eye(2) + 2 * params.mu * strain


def energy_density(grad: np.ndarray, params: LameParameters) -> np.ndarray:
    """(ℂ⁰e(u), e(u)) from displacement gradients (..., 2, 2)."""
    strain = _strain(grad)
    trace = np.trace(strain, axis1=-2, axis2=-1)
    return params.lam * trace**2 + 2 * params.mu * np.sum(strain**2, axis=(-2, -1))


def gap_cells(problem: ElasticityProblem) -> np.ndarray:
    mesh = problem.mesh
    return np.flatnonzero(mesh.gap_nodes[mesh.triangles].all(axis=1))


def singular_load(problem: ElasticityProblem, alpha: int, profile: GapProfile, window: float) -> np.ndarray:
    """Load vector F with Fₖ = −∫(ℂ⁰e(g), e(φₖ)) for every shape function φₖ."""
    space = problem.space
    cells = gap_cells(problem)
    vertices = space.mesh.nodes[space.mesh.triangles[cells]]
    grad_bary = space.grad_bary[cells]
    dofs = space.cell_dofs[cells]
    load = np.zeros(space.n_dofs)
    for bary, weight in zip(DEGREE5_RULE.points, DEGREE5_RULE.weights, strict=True):
        x = np.einsum("k,ckd->cd", bary, vertices)
        _, grad = singular_field(alpha, profile, problem.params, window, x)
        sigma = _stress(grad, problem.params)
        local = np.einsum("cik,cak->cai", sigma, shape_gradients(bary, grad_bary)).reshape(len(cells), 12)
        np.add.at(load, dofs, -(weight * space.areas[cells])[:, None] * local)
    return load


def _gap_weight(profile: GapProfile, window: float, x: np.ndarray) -> np.ndarray:
    """χ at points of the gap, 0 elsewhere on the boundary (the far side of each inclusion included)."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    r = np.minimum(np.abs(x[:, 0]), window)[:, None]
    slack = float(profile.gap(np.array([[window]]))[0])
    inside = (
        (np.abs(x[:, 0]) < window)
        & (x[:, 1] >= profile.h2(r) - slack)
        & (x[:, 1] <= profile.h1(r) + slack)
    )
    chi, _ = cutoff(x[:, 0], window)
    return np.where(inside, chi, 0.0)


def remainder_data(alpha: int, params: LameParameters, profile: GapProfile, window: float) -> DirichletData:
    """Boundary values of w: (1 − χ) times the data of v₁^{*α}."""
    own = inclusion_data(alpha, 1, params, profile, touching=True)

    def damped(fn):
        return lambda x: (1 - _gap_weight(profile, window, x))[:, None] * np.asarray(fn(x), dtype=float).reshape(-1, 2)

    return DirichletData(f"w1^{alpha}", {tag: damped(fn) for tag, fn in own.pieces.items()})


def cross_section(alpha: int, profile: GapProfile, params: LameParameters, window: float, x1) -> np.ndarray:
    """∫_{h₂}^{h₁}(ℂ⁰e(g), e(g)) dx₂ at abscissas x₁ (n,), by Gauss–Legendre across the gap."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    xp = np.abs(x1)[:, None]
    top, bottom = profile.h1(xp), profile.h2(xp)
    half = (top - bottom) / 2
    x2 = ((top + bottom) / 2)[:, None] + half[:, None] * nodes
    points = np.stack([np.broadcast_to(x1[:, None], x2.shape), x2], axis=-1)
    _, grad = singular_field(alpha, profile, params, window, points)
    return half * (energy_density(grad, params) @ weights)


@dataclass(frozen=True)
class RegularEnergy:
    """a*₁₁^{αα}(η) − 𝓛∫_{η<|x₁|<R} w/(h₁−h₂), split by origin."""

    alpha: int
    eta: float
    window: float
    analytic: float
    coupling: float
    remainder: float

    @property
    def value(self) -> float:
        return self.analytic + self.coupling + self.remainder


def regular_energy(
    problem: ElasticityProblem, alpha: int, profile: GapProfile, window: float | None = None
) -> RegularEnergy:
    """Regular part of the principal energy on a touching mesh truncated at η."""
    mesh = problem.mesh
    if mesh.eta is None:
        raise ValueError("the singular part is split off on touching meshes only")
    rigid_basis(2).check_index(alpha)
    window = mesh.window if window is None else window
    eta = mesh.eta
    if not eta < window / 2:
        raise ValueError(f"the cutoff eta = {eta} must lie below half the gap window R = {window}")
    params = problem.params
    lame = lame_factors(params)[alpha - 1]
    power = gap_weight_power(alpha)

    load = singular_load(problem, alpha, profile, window)
    (w,) = problem.solve([remainder_data(alpha, params, profile, window)], loads=[load], epsilon=0.0)
    coupling = -2 * float(load @ w.vector)
    remainder = float(w.vector @ (problem.stiffness @ w.vector))

    def bounded(t):
        section = cross_section(alpha, profile, params, window, t)[0]
        return section - lame * t**power / float(profile.gap(np.array([[t]]))[0])

    half_line, _ = quad(bounded, eta, window, points=[window / 2], epsabs=1e-10, epsrel=1e-10, limit=200)
    result = RegularEnergy(alpha, eta, window, 2 * half_line, coupling, remainder)
    logger.debug(
        f"regular part of a*11^{{{alpha}{alpha}}} at eta={eta:g}: {result.value:.6g} "
        f"(analytic {result.analytic:.4g}, coupling {coupling:.4g}, remainder {remainder:.4g})"
    )
    return result
