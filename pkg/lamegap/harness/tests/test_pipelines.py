import numpy as np
import pandas as pd
import pytest

from lamegap.errors import ConfigError
from lamegap.factors import StarredQuantities, assemble_matrices, read_factors, squares_geometry_constants
from lamegap.fem import read_solution
from lamegap.harness import (
    coefficient_frame,
    coefficient_models,
    run_asymptotic,
    run_factors,
    run_solve,
    run_squares,
    squares_constants,
    touching_factors,
    validate_config,
)

COARSE = {"n_layers": 4, "target_h": 0.2, "gap_refinement_ratio": 0.5}


def config_for(tmp_path, geometry, **run):
    return validate_config(
        {
            "geometry": geometry,
            "mesh": COARSE,
            "run": {"epsilons": [1e-2, 10**-2.5, 1e-3]} | run,
            "output": {"directory": str(tmp_path)},
        }
    )


def test_run_solve(tmp_path):
    result = run_solve(config_for(tmp_path, {"shape": "disks"}))
    meta, frame = read_solution(result.paths["solution"])
    assert float(meta["epsilon"]) == 1e-2
    assert len(frame) == len(result.u.values)
    table = pd.read_csv(result.paths["coefficients"])
    np.testing.assert_allclose(table["X1"], result.coefficients.X1, rtol=1e-15)
    np.testing.assert_allclose(table["C1"] - table["C2"], table["X1"], rtol=1e-12, atol=1e-15)


def test_coefficient_frame(tmp_path, starred_tables):
    energy, b = starred_tables()
    factors = assemble_matrices(StarredQuantities.from_tables(2, 2, energy, b, eta=0.01))
    config = config_for(tmp_path, {"shape": "disks"})
    frame = coefficient_frame(coefficient_models(config, factors))
    assert len(frame) == 3 * 3
    assert set(frame["source"]) == {"expansion"}
    assert (frame["upper"] >= frame["lower"]).all()
    translations = frame[frame["alpha"] == 1]["coefficient"].to_numpy()
    # translational coefficients scale like (L M0 rho0)^-1 = eps^{1/2}
    np.testing.assert_allclose(translations[1:] / translations[:-1], 10**-0.25, rtol=1e-12)


def test_coefficient_frame_for_squares(tmp_path, starred_tables):
    energy, b = starred_tables()
    starred = StarredQuantities.from_tables(2, 3, energy, b, eta=0.01)
    factors = assemble_matrices(starred)
    config = config_for(tmp_path, {"shape": "squares", "m": 3})
    gc = squares_geometry_constants(1.0, 1.0, 3, config.r0, config.params, starred)
    frame = coefficient_frame(coefficient_models(config, factors, gc))
    assert set(frame["source"]) == {"squares"}
    rotation = frame[frame["alpha"] == 3].set_index("epsilon")["coefficient"]
    expected = factors.ratio(3) / (gc.lame[2] * gc.M2) / (np.abs(np.log(rotation.index)) + gc.G[2])
    np.testing.assert_allclose(rotation.to_numpy(), expected, rtol=1e-12)


def test_squares_pipeline_needs_squares(tmp_path):
    with pytest.raises(ConfigError):
        run_squares(config_for(tmp_path, {"shape": "disks"}))


@pytest.mark.slow
def test_run_factors(tmp_path):
    factors, path = run_factors(config_for(tmp_path, {"shape": "squares", "m": 4}, eta=1e-2))
    meta, frame = read_factors(path)
    assert meta["eta"] == 1e-2
    assert list(frame.columns) == ["entry", "value", "value_half", "rel_diff"]
    assert frame["entry"].str.startswith("det ").sum() == len(factors.determinants)


@pytest.mark.slow
def test_run_asymptotic_squares_m3(tmp_path):
    frame, path = run_asymptotic(config_for(tmp_path, {"shape": "squares", "m": 3}, epsilons=[1e-3]))
    assert path.exists()
    assert list(frame["alpha"]) == [1, 2, 3]
    assert set(frame["source"]) == {"squares"}


@pytest.mark.slow
@pytest.mark.parametrize("m", [3, 4])
def test_squares_constants_settle(tmp_path, m):
    config = validate_config({"geometry": {"shape": "squares", "m": m}, "output": {"directory": str(tmp_path)}})
    gc = squares_constants(config, touching_factors(config, config.boundary_field()))
    assert all(value is not None for value in gc.K)
    for alpha in (1, 2, 3):
        assert gc.eta_change[alpha - 1] <= 0.05
        assert gc.r0_change[alpha - 1] <= 0.02
