import math

import numpy as np
import pandas as pd
import pytest

from lamegap.asymptotics import constants
from lamegap.elasticity import LameParameters, rigid_basis
from lamegap.errors import ChartError, ConfigError, NumericalError, SolverError
from lamegap.fem import gradient_at, solve_subproblems
from lamegap.geometry import DomainSpec
from lamegap.harness import (
    SweepRunner,
    fit_quantities,
    gap_decay,
    predicted_exponents,
    run_sweep,
    stage,
    validate_config,
    write_report,
)
from lamegap.reconstruction import METRIC_COLUMNS, mid_gap

COARSE = {"n_layers": 4, "target_h": 0.2, "gap_refinement_ratio": 0.5}


def coarse_config(tmp_path, **run):
    return validate_config(
        {
            "geometry": {"shape": "disks"},
            "mesh": COARSE,
            "run": {"epsilons": [0.1, 0.03, 0.01], "factors": False} | run,
            "output": {"directory": str(tmp_path)},
        }
    )


@pytest.fixture(scope="module")
def coarse_report(tmp_path_factory):
    return run_sweep(coarse_config(tmp_path_factory.mktemp("coarse")), threads=1)


def test_stage_tags_failures():
    with pytest.raises(NumericalError) as info:
        with stage("limit"):
            raise SolverError("no convergence")
    assert info.value.stage == "limit"
    assert str(info.value) == "[limit] no convergence"
    with pytest.raises(NumericalError) as info:
        with stage("reconstruction"):
            raise ChartError("outside")
    assert info.value.stage == "reconstruction"
    with pytest.raises(NumericalError) as info:
        with stage("outer"):
            with stage("inner"):
                raise SolverError("no convergence")
    assert info.value.stage == "inner"
    with pytest.raises(ConfigError):
        with stage("mesh"):
            raise ConfigError("bad")


@pytest.mark.parametrize(
    "m,name,expected",
    [
        (2, "max_gap_grad", -0.5),
        (2, "grad_center", -0.5),
        (4, "grad_ring", -0.5),
        (4, "grad_center", -0.25),
        (2, "a11_1", -0.5),
        (2, "a11_3", 0.0),
        (4, "b_diff_2", 0.5),
    ],
)
def test_predicted_exponents(m, name, expected):
    assert predicted_exponents(m, with_b=True)[name] == pytest.approx(expected)


def test_fit_quantities_skips_unusable_series():
    epsilons = np.array([1e-1, 1e-2, 1e-3])
    quantities = pd.DataFrame(
        {
            "epsilon": epsilons,
            "max_gap_grad": epsilons**-0.5,
            "grad_center": [1.0, 0.0, 2.0],
            "grad_ring": [1.0, math.nan, 2.0],
        }
    )
    fits, rate_fits = fit_quantities(quantities, predicted_exponents(2, with_b=False))
    assert list(fits["quantity"]) == ["max_gap_grad"]
    assert fits["agrees"].iloc[0]
    assert rate_fits["max_gap_grad"].exponent == pytest.approx(-0.5)


def test_coarse_sweep(coarse_report):
    quantities = coarse_report.quantities
    assert list(quantities["epsilon"]) == [0.1, 0.03, 0.01]
    assert (quantities["max_gap_grad"].diff().dropna() > 0).all()
    assert (quantities["d_min_eigenvalue"] > 0).all()
    assert quantities["rigid_error"].isna().all()
    assert "b_diff_1" not in quantities
    # solver coefficients reproduce themselves
    np.testing.assert_array_equal(quantities["coeff_rel_err"], 0.0)
    assert {"max_gap_grad", "grad_center", "grad_ring", "a11_1"} <= set(coarse_report.fits["quantity"])


def test_sweep_is_reproducible_across_threads(tmp_path, coarse_report):
    again = run_sweep(coarse_config(tmp_path), threads=3)
    pd.testing.assert_frame_equal(again.quantities, coarse_report.quantities)
    pd.testing.assert_frame_equal(again.metrics, coarse_report.metrics)


def test_write_report(tmp_path, coarse_report):
    paths = write_report(coarse_report, tmp_path)
    assert set(paths) == {"metrics", "quantities", "fits", "summary", "plot"}
    metrics = pd.read_csv(paths["metrics"])
    assert list(metrics.columns) == METRIC_COLUMNS
    assert len(metrics) == sum(3 + len(result.comparison.probes) for result in coarse_report.results)
    assert "<svg" in paths["plot"].read_text()
    summary = paths["summary"].read_text()
    assert "| max_gap_grad |" in summary
    assert "predicted" in summary


def test_rigid_data_has_no_blowup(tmp_path):
    config = validate_config(
        {
            "geometry": {"shape": "disks"},
            "boundary": {"preset": "rigid", "alpha": 3},
            "mesh": COARSE,
            "run": {"epsilons": [1e-2], "factors": False},
            "output": {"directory": str(tmp_path)},
        }
    )
    runner = SweepRunner(config=config, phi=config.boundary_field())
    result = runner(1e-2)
    assert result.quantities["rigid_error"] <= 1e-6
    coefficients = result.comparison.coefficients
    np.testing.assert_allclose(coefficients["coeff_direct"], [0.0, 0.0, 0.0], atol=1e-6)


@pytest.fixture(scope="module")
def disks_sweep(tmp_path_factory):
    config = validate_config(
        {
            "geometry": {"shape": "disks"},
            "output": {"directory": str(tmp_path_factory.mktemp("disks"))},
        }
    )
    return run_sweep(config)


@pytest.mark.slow
def test_disks_blowup_rate(disks_sweep):
    fit = disks_sweep.rate_fits["max_gap_grad"]
    assert fit.exponent == pytest.approx(-0.5, abs=0.1)
    fits = disks_sweep.fits.set_index("quantity")
    assert fits.loc["max_gap_grad", "predicted"] == pytest.approx(-0.5)


@pytest.mark.slow
def test_disks_energy_scaling(disks_sweep):
    quantities = disks_sweep.quantities
    profile = disks_sweep.config.profile
    bundle = constants(2, 2, profile.tau, disks_sweep.config.params)
    limit = bundle.lame(1) * bundle.require(0)
    scaled = quantities["a11_1"] * quantities["epsilon"] ** 0.5
    deviation = np.abs(scaled / limit - 1)
    assert deviation.iloc[-1] <= 0.1
    assert (np.diff(deviation) < 0).all()


@pytest.mark.slow
def test_disks_starred_convergence(disks_sweep):
    for alpha in (1, 2, 3):
        assert disks_sweep.rate_fits[f"b_diff_{alpha}"].exponent >= 0.3
    assert (disks_sweep.quantities["d_min_eigenvalue"] > 0).all()
    assert disks_sweep.factors.d_min_eigenvalue > 0


def test_gap_decay_subtracts_the_rigid_motion(disks_mesh):
    subproblems = solve_subproblems(disks_mesh, LameParameters(lam=1.0, mu=1.0, d=2))
    centre = mid_gap(DomainSpec(r1=1.0, r2=1.0, m=2, epsilon=0.1).profile, 0.1, 0.0)
    for alpha in (1, 2, 3):
        first = gradient_at(subproblems.field(1, alpha), centre)
        total = first + gradient_at(subproblems.field(2, alpha), centre)
        expected = np.linalg.norm(total - rigid_basis(2).gradient(alpha)) / np.linalg.norm(first)
        assert gap_decay(subproblems, alpha, centre) == pytest.approx(expected)
    # the rotation leaves a nonzero gradient in v₁ + v₂
    assert gap_decay(subproblems, 3, centre) < np.linalg.norm(total) / np.linalg.norm(first)


@pytest.mark.slow
def test_disks_gap_decay(disks_sweep):
    last = disks_sweep.quantities.iloc[-1]
    assert last["epsilon"] == pytest.approx(1e-3)
    for alpha in (1, 2, 3):
        assert last[f"decay_{alpha}"] <= 1e-3


@pytest.mark.slow
def test_disks_coefficient_agreement(disks_sweep):
    metrics = disks_sweep.metrics.dropna(subset=["alpha"])
    metrics = metrics[metrics["epsilon"] <= 1e-2 * (1 + 1e-12)]
    factors = disks_sweep.factors
    for alpha, rows in metrics.groupby("alpha"):
        if factors.determinants[factors.names(int(alpha))[0]].singular:
            continue
        errors = rows.sort_values("epsilon", ascending=False)["rel_err"].to_numpy()
        assert len(errors) == 3
        assert (np.diff(errors) < 0).all(), f"alpha={alpha}: {errors}"


@pytest.mark.slow
def test_squares_rate_split(tmp_path):
    config = validate_config(
        {
            "geometry": {"shape": "squares", "m": 4},
            "run": {"factors": False},
            "output": {"directory": str(tmp_path)},
        }
    )
    report = run_sweep(config)
    assert report.rate_fits["grad_ring"].exponent == pytest.approx(-0.5, abs=0.15)
    assert report.rate_fits["grad_center"].exponent == pytest.approx(-0.25, abs=0.1)
