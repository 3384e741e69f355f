import math

import numpy as np
import pytest
from scipy.integrate import quad

from lamegap.asymptotics import constants, gamma_bracket, rho, unit_ball_volume
from lamegap.elasticity import LameParameters
from lamegap.errors import RegimeError


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_disks_constant(params):
    bundle = constants(2, 2, 1.0, params)
    assert bundle.M0 == pytest.approx(math.pi, rel=1e-12)
    assert bundle.M2 is None
    with pytest.raises(RegimeError):
        bundle.require(2)


def test_critical_bracket(params):
    assert gamma_bracket(2, 3, 2) == 1.0
    assert constants(2, 3, 1.0, params).M2 == pytest.approx(2 / 3)


def test_bracket_below_threshold():
    assert gamma_bracket(3, 1.5, 0) is None
    assert gamma_bracket(2, 2, 0) == pytest.approx(math.pi)


def test_lame_factors(params):
    assert constants(2, 2, 1.0, params).L == (1.0, 3.0, 3.0)
    bundle = constants(3, 4, 1.0, LameParameters(lam=2.0, mu=0.5, d=3))
    assert bundle.L == (0.5, 0.5, 3.0, 3.0, 3.0, 1.0)
    assert bundle.lame(6) == 1.0
    with pytest.raises(ValueError):
        bundle.lame(7)


def test_dimension_mismatch(params):
    with pytest.raises(ValueError):
        constants(3, 4, 1.0, params)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_gap_integral_matches_leading_constant(m, params):
    tau, R = 0.7, 0.5
    M0 = constants(2, m, tau, params).require(0)

    def relative_error(eps):
        knee = (eps / tau) ** (1 / m)
        half, _ = quad(lambda x: 1 / (eps + tau * x**m), 0, R, points=[knee], limit=200)
        return abs(2 * half / (M0 * rho(0, 2, m, eps)) - 1)

    errors = [relative_error(eps) for eps in (1e-3, 1e-4, 1e-5, 1e-6)]
    assert np.all(np.diff(errors) < 0)
    assert errors[-1] < 0.03


def test_gap_integral_closed_form_disks(params):
    eps, R = 1e-6, 0.5
    closed = 2 / math.sqrt(eps) * math.atan(R / math.sqrt(eps))
    half, _ = quad(lambda x: 1 / (eps + x**2), 0, R, points=[math.sqrt(eps)], limit=200)
    assert 2 * half == pytest.approx(closed, rel=1e-8)
    leading = constants(2, 2, 1.0, params).M0 * rho(0, 2, 2, eps)
    assert leading == pytest.approx(math.pi / math.sqrt(eps))
    assert closed / leading == pytest.approx(1.0, abs=0.03)
