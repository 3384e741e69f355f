import logging
from pathlib import Path

import pandas as pd

from lamegap.errors import NumericalError

from .matrices import FactorMatrices
from .starred import STABILITY_COLUMNS, relative_change

logger = logging.getLogger(__name__)

FACTORS_FORMAT = "lamegap-factors 1"


def factor_frame(factors: FactorMatrices) -> pd.DataFrame:
    """Starred entries and factor determinants at η and η/2 with their relative difference."""
    if factors.starred is None:
        raise ValueError("factor matrices carry no starred entries to dump")
    names = list(factors.determinants)
    dets = pd.DataFrame(
        {
            "entry": [f"det {name}" for name in names],
            "value": [factors.coarse_determinants.get(name, float("nan")) for name in names],
            "value_half": [factors.determinants[name].value for name in names],
        }
    )
    dets["rel_diff"] = relative_change(dets["value"], dets["value_half"])
    return pd.concat([factors.starred.stability, dets], ignore_index=True)[STABILITY_COLUMNS]


def write_factors(factors: FactorMatrices, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        f.write(f"# {FACTORS_FORMAT}\n")
        f.write(f"# regime {factors.regime.name}\n")
        f.write(f"# d {factors.d}\n")
        f.write(f"# m {float(factors.m)!r}\n")
        f.write(f"# eta {float(factors.eta)!r}\n")
        f.write(f"# d_min_eigenvalue {factors.d_min_eigenvalue!r}\n")
        factor_frame(factors).to_csv(f, index=False, float_format="%.17g")
    logger.info(f"wrote factor matrices ({factors.regime.value}) to {path}")
    return path


def read_factors(path: Path | str) -> tuple[dict, pd.DataFrame]:
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        if f.readline().rstrip("\n") != f"# {FACTORS_FORMAT}":
            raise NumericalError(f"{path} is not a lamegap factor dump", stage="factors-io")
        meta = {}
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(" ")
            meta[key] = value
    for key in ("m", "eta", "d_min_eigenvalue"):
        meta[key] = float(meta[key])
    meta["d"] = int(meta["d"])
    return meta, pd.read_csv(path, comment="#", float_precision="round_trip")
