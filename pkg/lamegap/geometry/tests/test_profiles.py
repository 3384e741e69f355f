import math

import numpy as np
import pytest

from lamegap.errors import ChartError
from lamegap.geometry import (
    CallableProfile,
    curvilinear_square_profile,
    delta,
    omega_t,
    power_profile,
    squares_tau,
)


def test_delta_at_origin_is_epsilon(disks_profile, squares4_profile):
    assert delta(disks_profile, 1e-3, 0.0) == pytest.approx(1e-3)
    assert delta(squares4_profile, 0.05, 0.0) == pytest.approx(0.05)


def test_delta_disks_matches_circle_formula(disks_profile):
    expected = 2 - 2 * math.sqrt(1 - 0.01)
    assert delta(disks_profile, 0.0, 0.1) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.0100251, rel=1e-5)


def test_delta_power_profile(parabola_profile):
    assert delta(parabola_profile, 1e-3, 0.1) == pytest.approx(1.1e-2, rel=1e-12)


def test_delta_outside_chart(disks_profile):
    with pytest.raises(ChartError):
        delta(disks_profile, 1e-2, 2.05 * disks_profile.R)
    with pytest.raises(ValueError):
        delta(disks_profile, -1e-2, 0.0)


@pytest.mark.parametrize("r1,r2,m,tau", [(1, 1, 2, 1.0), (1, 1, 4, 0.5), (2, 1, 2, 0.75)])
def test_squares_tau(r1, r2, m, tau):
    assert squares_tau(r1, r2, m) == pytest.approx(tau)
    assert curvilinear_square_profile(r1, r2, m).tau == pytest.approx(tau)


def test_squares_rejects_bad_radii():
    with pytest.raises(ValueError):
        curvilinear_square_profile(0.0, 1.0, 2)
    with pytest.raises(ValueError):
        curvilinear_square_profile(1.0, -1.0, 4)


def test_delta_positive_and_at_least_epsilon(disks_profile, squares4_profile, rng):
    for profile in (disks_profile, squares4_profile):
        xp = rng.uniform(-2 * profile.R, 2 * profile.R, size=200)
        values = delta(profile, 1e-3, xp)
        assert np.all(values >= 1e-3)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_squares_remainder_constant_is_stable(m):
    profile = curvilinear_square_profile(1.0, 1.5, m)

    def fitted(r0):
        r = np.linspace(r0 / 8, r0, 200)
        return np.max(np.abs(profile.gap(r) - profile.tau * r**m) / r ** (2 * m))

    coarse, fine = fitted(0.3), fitted(0.15)
    assert fine == pytest.approx(coarse, rel=0.1)


def test_profile_derivative_bounds(squares4_profile, disks_profile, rng):
    for profile in (disks_profile, squares4_profile):
        r = rng.uniform(1e-3, 2 * profile.R, size=300)
        for grad, hess in ((profile.grad_h1, profile.hess_h1), (profile.grad_h2, profile.hess_h2)):
            assert np.all(np.abs(grad(r)[:, 0]) <= profile.kappa1 * r ** (profile.m - 1) * (1 + 1e-9))
            assert np.all(np.abs(hess(r)[:, 0, 0]) <= profile.kappa1 * r ** (profile.m - 2) * (1 + 1e-9))


def test_gap_is_even(squares4_profile, rng):
    x = rng.uniform(0, squares4_profile.R, size=50)
    np.testing.assert_allclose(squares4_profile.gap(x), squares4_profile.gap(-x), rtol=0, atol=0)


@pytest.mark.parametrize("which", ["squares", "power3d"])
def test_gradients_match_finite_differences(which, rng):
    if which == "squares":
        profile = curvilinear_square_profile(1.0, 2.0, 3)
        points = rng.uniform(-0.7, 0.7, size=(20, 1))
    else:
        profile = power_profile(tau=0.8, m=3, R=0.5, split=0.3, d=3)
        points = rng.uniform(-0.6, 0.6, size=(20, 2))
    step = 1e-6
    k = profile.d - 1
    for fn, grad, hess in (
        (profile.h1, profile.grad_h1, profile.hess_h1),
        (profile.h2, profile.grad_h2, profile.hess_h2),
    ):
        for x in points:
            fd = np.array([(fn(x + step * e) - fn(x - step * e)) / (2 * step) for e in np.eye(k)])
            np.testing.assert_allclose(grad(x), fd, rtol=1e-6, atol=1e-9)
            fd2 = np.column_stack([(grad(x + step * e) - grad(x - step * e)) / (2 * step) for e in np.eye(k)])
            np.testing.assert_allclose(hess(x), fd2, rtol=1e-5, atol=1e-7)


def test_power_profile_is_exact():
    profile = power_profile(tau=2.0, m=4, R=0.3, split=0.25)
    x = np.array([0.1, -0.2])
    np.testing.assert_allclose(profile.h1(x), 0.5 * x**4)
    np.testing.assert_allclose(profile.h2(x), -1.5 * x**4)
    assert math.isinf(profile.sigma)


def test_callable_profile_without_derivatives():
    profile = CallableProfile(
        m=2, tau=1.0, sigma=1.0, R=0.5, h1_fn=lambda x: 0.5 * x[..., 0] ** 2, h2_fn=lambda x: -0.5 * x[..., 0] ** 2
    )
    assert not profile.has_derivatives
    assert delta(profile, 0.0, 0.2) == pytest.approx(0.04)
    with pytest.raises(ValueError):
        profile.grad_h1(0.2)


def test_omega_t_membership(parabola_profile):
    eps = 1e-2
    region = omega_t(parabola_profile, eps, 0.0, 0.1)
    assert bool(region(np.array([0.0, eps / 2])))
    on_upper = np.array([0.05, eps + parabola_profile.h1(0.05)])
    assert not bool(region(on_upper))
    assert not bool(region(np.array([0.2, 0.0])))


def test_omega_t_parameter_checks(parabola_profile):
    with pytest.raises(ChartError):
        omega_t(parabola_profile, 1e-2, 0.0, 1.5)
    with pytest.raises(ChartError):
        omega_t(parabola_profile, 1e-2, 0.6, 0.1)


def test_omega_t_monte_carlo_volume(parabola_profile, rng):
    eps, R = 1e-2, 0.5
    region = omega_t(parabola_profile, eps, 0.0, R)
    lo, hi = -0.125, eps + 0.125
    samples = np.column_stack([rng.uniform(-R, R, 200_000), rng.uniform(lo, hi, 200_000)])
    volume = np.mean(region(samples)) * (2 * R) * (hi - lo)
    exact = 2 * (eps * R + R**3 / 3)
    assert exact == pytest.approx(0.0933, rel=1e-3)
    assert volume == pytest.approx(exact, rel=0.02)
