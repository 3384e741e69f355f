"""Log–log convergence plots of the sweep quantities."""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.figure import Figure

# text stays text in the SVG and ids do not change between runs
matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "lamegap"


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False


@dataclass
class LogLogPlot:
    title: str
    xlabel: str = "epsilon"
    ylabel: str = ""
    figsize: tuple[float, float] = (7.0, 5.0)
    series: list[Series] = field(default_factory=list)

    def add(self, label: str, x, y, dashed: bool = False):
        """Add a series, dropping points that cannot sit on log axes; fewer than two left means no series."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
        if keep.sum() >= 2:
            order = np.argsort(x[keep])
            self.series.append(Series(label, x[keep][order], y[keep][order], dashed))

    def figure(self) -> Figure:
        if not self.series:
            raise ValueError("nothing to plot")
        fig = Figure(figsize=self.figsize)
        ax = fig.add_subplot()
        for s in self.series:
            if s.dashed:
                ax.loglog(s.x, s.y, "k--", linewidth=1.0, label=s.label)
            else:
                ax.loglog(s.x, s.y, "o-", markersize=5, label=s.label)
        ax.set_title(self.title)
        ax.set_xlabel(self.xlabel)
        if self.ylabel:
            ax.set_ylabel(self.ylabel)
        ax.grid(True, which="major", color="#e0e0e0")
        ax.legend(fontsize="small")
        fig.tight_layout()
        return fig

    def write(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.figure().savefig(path, format=path.suffix.lstrip(".") or "svg", metadata={"Date": None})
        return path
