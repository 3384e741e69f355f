import logging
from pathlib import Path

import numpy as np
import pandas as pd

from lamegap.errors import SolverError

from .solver import FieldSolution

logger = logging.getLogger(__name__)

SOLUTION_FORMAT = "lamegap-solution 1"
COLUMNS = ["x1", "x2", "u1", "u2", "tag"]


def solution_frame(solution: FieldSolution) -> pd.DataFrame:
    space = solution.space
    return pd.DataFrame(
        {
            "x1": space.nodes[:, 0],
            "x2": space.nodes[:, 1],
            "u1": solution.values[:, 0],
            "u2": solution.values[:, 1],
            "tag": space.node_tags.astype(int),
        },
        columns=COLUMNS,
    )


def write_solution(solution: FieldSolution, path: Path | str) -> Path:
    """Node/displacement table behind a metadata header, floats with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        f.write(f"# {SOLUTION_FORMAT}\n")
        f.write(f"# label {solution.label}\n")
        f.write(f"# epsilon {float(solution.epsilon)!r}\n")
        f.write(f"# residual {float(solution.residual)!r}\n")
        solution_frame(solution).to_csv(f, index=False, float_format="%.17g")
    logger.debug(f"wrote {solution.label} to {path}")
    return path


def read_solution(path: Path | str) -> tuple[dict, pd.DataFrame]:
    """Metadata and table of a solution dump."""
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        first = f.readline().rstrip("\n")
        if first != f"# {SOLUTION_FORMAT}":
            raise SolverError(f"{path} is not a lamegap solution dump", stage="solution-io")
        meta = {}
        for line in f:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(" ")
            meta[key] = value
    meta["epsilon"] = float(meta["epsilon"])
    meta["residual"] = float(meta["residual"])
    table = pd.read_csv(path, comment="#", dtype={"tag": np.int64}, float_precision="round_trip")
    return meta, table
