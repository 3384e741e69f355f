import numpy as np
import pytest

from lamegap.harness import LogLogPlot


def test_write_svg(tmp_path):
    plot = LogLogPlot(title="rates <m=2>")
    eps = np.array([1e-1, 1e-2, 1e-3])
    plot.add("max |grad u|", eps, eps**-0.5)
    plot.add("fit", eps, 1.1 * eps**-0.5, dashed=True)
    svg = plot.write(tmp_path / "plot.svg").read_text()
    assert "<svg" in svg and svg.rstrip().endswith("</svg>")
    assert "rates &lt;m=2&gt;" in svg
    assert "max |grad u|" in svg
    ax = plot.figure().axes[0]
    assert ax.get_xscale() == ax.get_yscale() == "log"
    assert len(ax.get_lines()) == 2


def test_series_are_sorted_by_epsilon():
    plot = LogLogPlot(title="t")
    plot.add("s", [1e-3, 1e-1, 1e-2], [3.0, 1.0, 2.0])
    np.testing.assert_array_equal(plot.series[0].x, [1e-3, 1e-2, 1e-1])
    np.testing.assert_array_equal(plot.series[0].y, [3.0, 2.0, 1.0])


def test_unplottable_points_are_dropped():
    plot = LogLogPlot(title="t")
    plot.add("one point left", [1e-1, 1e-2, 1e-3], [0.0, -1.0, 2.0])
    assert plot.series == []
    with pytest.raises(ValueError):
        plot.figure()
    plot.add("partial", [1e-1, 1e-2, 1e-3], [np.nan, 1.0, 2.0])
    assert len(plot.series[0].x) == 2
