import math
from dataclasses import replace

import numpy as np
import pytest

from lamegap.asymptotics import constants, lame_factors
from lamegap.elasticity import LameParameters
from lamegap.errors import InstabilityError, RegimeError
from lamegap.factors import (
    StarredQuantities,
    assemble_matrices,
    coeff_expansion,
    example_squares_expansion,
    gap_integral,
    profile_correction,
    squares_gap,
    squares_geometry_constants,
    strict_convex_expansion,
    strict_convex_geometry_constant,
    tail_term,
)
from lamegap.geometry import curvilinear_square_profile

PARAMS = LameParameters(lam=1.0, mu=1.0)


def touching(starred_tables, m, eta=0.01, balanced=True):
    """Placeholder touching tables whose principal energies grow like the gap integral as the cutoff shrinks."""
    energy, b = starred_tables()
    tables = []
    for cutoff in (eta, eta / 2):
        table = energy.copy()
        for alpha in (1, 2, 3):
            growth = lame_factors(PARAMS)[alpha - 1] * gap_integral(1.0, 1.0, m, cutoff, 0.25, alpha) if balanced else 0
            table[0, 0, alpha - 1, alpha - 1] += growth + alpha
        tables.append(table)
    return StarredQuantities.from_tables(2, m, tables[0], b, energy_half=tables[1], eta=eta)


def test_tail_terms():
    assert tail_term(1, 2, 0.25, 1.0, PARAMS.mu) == pytest.approx(-8.0, rel=1e-14)
    assert tail_term(3, 3, 0.25, 1.0, 3.0) == pytest.approx(2 * math.log(0.25) * 3.0, rel=1e-14)
    assert tail_term(3, 3, 0.25, 1.0, 1.0) == pytest.approx(-2.7726, abs=1e-4)
    assert tail_term(3, 4, 0.25, 1.0, 1.0) == pytest.approx(-8.0, rel=1e-14)
    with pytest.raises(RegimeError):
        tail_term(3, 2, 0.25, 1.0, 1.0)
    with pytest.raises(ValueError):
        tail_term(4, 4, 0.25, 1.0, 1.0)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_gap_matches_profile(m):
    profile = curvilinear_square_profile(1.0, 0.8, m)
    x = np.linspace(-0.3, 0.3, 13)
    np.testing.assert_allclose(squares_gap(1.0, 0.8, m, x), profile.gap(x), rtol=1e-12, atol=1e-300)


def test_disk_integrals_in_closed_form():
    r0, eta = 0.25, 0.01
    theta = math.asin(r0)
    assert profile_correction(1.0, 1.0, 2, r0, 1) == pytest.approx(-(theta - math.tan(theta / 2)), rel=1e-10)
    rotation = -(r0 - (r0 * math.sqrt(1 - r0**2) + theta) / 2)
    assert profile_correction(1.0, 1.0, 2, r0, 3) == pytest.approx(rotation, rel=1e-9)

    def antiderivative(x):
        return -1 / x - math.sqrt(1 - x**2) / x - math.asin(x)

    assert gap_integral(1.0, 1.0, 2, eta, r0, 1) == pytest.approx(antiderivative(r0) - antiderivative(eta), rel=1e-10)


def test_integral_ranges():
    with pytest.raises(ValueError):
        profile_correction(1.0, 1.0, 2, 1.0, 1)
    with pytest.raises(ValueError):
        gap_integral(1.0, 1.0, 2, 0.3, 0.2, 1)


@pytest.mark.parametrize("m", [3, 4])
def test_constants_do_not_depend_on_r0(starred_tables, m):
    starred = touching(starred_tables, m)
    long = squares_geometry_constants(1.0, 1.0, m, 0.3, PARAMS, starred)
    short = squares_geometry_constants(1.0, 1.0, m, 0.15, PARAMS, starred)
    np.testing.assert_allclose(long.K, short.K, rtol=0, atol=1e-9 * np.abs(starred.energy).max())
    assert max(long.r0_change) < 1e-6
    bundle = constants(2, m, long.tau0, PARAMS)
    assert long.G[0] == pytest.approx(long.K[0] / (PARAMS.mu * bundle.M0), rel=1e-14)
    assert long.G[2] == pytest.approx(long.K[2] / (bundle.L[2] * bundle.M2), rel=1e-14)
    assert long.M_tilde[1] == pytest.approx(long.M_star[1] + bundle.L[1] * long.C_star[1], rel=1e-14)


@pytest.mark.parametrize("m", [3, 4])
def test_split_energies_drive_the_constants(starred_tables, m):
    # raw energies that would fail the cutoff check; the split-off values take over
    raw = touching(starred_tables, m, balanced=False)
    regular = np.array([1.5, 2.0, 0.5])
    split = replace(raw, regular=regular, regular_half=1.001 * regular, window=0.4)
    gc = squares_geometry_constants(1.0, 1.0, m, 0.25, PARAMS, split, enforce=True)
    lame = lame_factors(PARAMS)
    for alpha in (1, 2, 3):
        expected = 1.001 * regular[alpha - 1] + lame[alpha - 1] * gap_integral(1.0, 1.0, m, 0.25, 0.4, alpha)
        assert gc.M_star[alpha - 1] == pytest.approx(expected, rel=1e-12)
    assert max(gc.eta_change) < 1e-3
    assert max(gc.r0_change) < 1e-8
    fallback = squares_geometry_constants(1.0, 1.0, m, 0.25, PARAMS, replace(split, window=None))
    assert max(fallback.eta_change) > 0.05


def test_split_constant_ignores_r0_beyond_window(starred_tables):
    regular = np.array([1.5, 2.0, 0.5])
    split = replace(touching(starred_tables, 4), regular=regular, regular_half=regular, window=0.2)
    inside = squares_geometry_constants(1.0, 1.0, 4, 0.15, PARAMS, split)
    outside = squares_geometry_constants(1.0, 1.0, 4, 0.3, PARAMS, split)
    np.testing.assert_allclose(inside.K, outside.K, rtol=1e-9)


def test_rotation_constant_needs_m3(starred_tables):
    gc = squares_geometry_constants(1.0, 1.0, 2, 0.25, PARAMS, touching(starred_tables, 2))
    assert gc.K[2] is None and gc.K[0] is not None
    with pytest.raises(RegimeError):
        gc.require_G(3)


def test_cutoff_instability(starred_tables):
    # equal raw energies at η and η/2 leave the gap integral unbalanced
    starred = touching(starred_tables, 4, balanced=False)
    gc = squares_geometry_constants(1.0, 1.0, 4, 0.25, PARAMS, starred)
    assert max(gc.eta_change) > 0.05
    with pytest.raises(InstabilityError):
        squares_geometry_constants(1.0, 1.0, 4, 0.25, PARAMS, starred, enforce=True)


def test_pipeline_preconditions(starred_tables):
    starred = touching(starred_tables, 4, eta=0.2)
    with pytest.raises(ValueError):
        squares_geometry_constants(1.0, 1.0, 4, 0.25, PARAMS, starred)
    with pytest.raises(ValueError):
        squares_geometry_constants(1.0, 1.0, 3, 0.25, PARAMS, touching(starred_tables, 4))


@pytest.mark.parametrize("m, alpha", [(4, 1), (4, 3), (3, 2), (3, 3), (2, 1), (2, 3)])
def test_zero_geometry_constant_gives_leading_term(starred_tables, m, alpha):
    starred = touching(starred_tables, m)
    factors = assemble_matrices(starred)
    gc = squares_geometry_constants(1.0, 1.0, m, 0.25, PARAMS, starred)
    gc = gc.model_copy(update={"G": tuple(None if g is None else 0.0 for g in gc.G)})
    bundle = constants(2, m, gc.tau0, PARAMS)
    for eps in (1e-2, 1e-3):
        leading = coeff_expansion(alpha, 2, m, m, eps, factors, bundle).value
        assert example_squares_expansion(alpha, m, eps, gc, factors) == pytest.approx(leading, rel=1e-12)


@pytest.mark.parametrize("m, alpha", [(4, 1), (4, 3), (3, 3)])
def test_refined_expansion_approaches_leading_term(starred_tables, m, alpha):
    starred = touching(starred_tables, m)
    factors = assemble_matrices(starred)
    gc = squares_geometry_constants(1.0, 1.0, m, 0.25, PARAMS, starred)
    bundle = constants(2, m, gc.tau0, PARAMS)
    gaps = []
    for eps in (1e-4, 1e-8, 1e-12):
        leading = coeff_expansion(alpha, 2, m, m, eps, factors, bundle).value
        gaps.append(abs(example_squares_expansion(alpha, m, eps, gc, factors) / leading - 1))
    assert gaps[0] > gaps[1] > gaps[2]


def test_squares_case_mismatch(starred_tables):
    starred = touching(starred_tables, 4)
    factors = assemble_matrices(starred)
    gc = squares_geometry_constants(1.0, 1.0, 4, 0.25, PARAMS, starred)
    with pytest.raises(RegimeError):
        example_squares_expansion(1, 3, 1e-3, gc, factors)
    with pytest.raises(ValueError):
        example_squares_expansion(1, 4, 1.5, gc, factors)


def test_strict_convex_constant():
    k1, k2, R, lame, M3 = 2.0, 0.5, 0.3, 1.5, 0.7
    # ∫₀^{π/2} ln(a cos²θ + b sin²θ) dθ = π ln((√a + √b)/2)
    angular = math.pi * math.log((math.sqrt(1 / k1) + math.sqrt(1 / k2)) / 2)
    expected = 2 * math.log(R) - 2 / math.pi * angular + math.sqrt(k1 * k2) / (math.pi * lame) * M3
    assert strict_convex_geometry_constant(k1, k2, R, lame, M3) == pytest.approx(expected, rel=1e-12)
    value = strict_convex_expansion(0.4, k1, k2, lame, 1e-3, 1.2)
    assert value == pytest.approx(0.4 / (math.pi * lame * (math.log(1e3) + 1.2)), rel=1e-12)
    with pytest.raises(ValueError):
        strict_convex_geometry_constant(-1.0, k2, R, lame, M3)
