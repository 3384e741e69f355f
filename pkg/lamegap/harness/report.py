import logging
import math
from pathlib import Path

import pandas as pd

from lamegap.factors import write_factors
from lamegap.reconstruction import METRIC_COLUMNS

from .sweep import SweepReport
from .plot import LogLogPlot

logger = logging.getLogger(__name__)

PLOTTED = {
    "max_gap_grad": "max gap |grad u|",
    "grad_center": "|grad u| at x'=0",
    "grad_ring": "|grad u| on the ring",
}

FLOAT_FORMAT = "%.17g"


def _number(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "–"
    return f"{value:.4g}"


def generate_summary(report: SweepReport) -> str:
    """Markdown with fitted exponents next to the predicted ones."""
    config, quantities = report.config, report.quantities
    geometry = config.geometry
    md_lines = [
        f"# Sweep: {geometry.shape.value}, m = {geometry.m:g}",
        "",
        f"- r1 = {geometry.r1:g}, r2 = {geometry.r2:g}, lambda = {config.material.lam:g}, mu = {config.material.mu:g}",
        f"- boundary data: {config.boundary.preset.value} (seed {config.run.seed})",
        f"- epsilons: {', '.join(f'{eps:.4g}' for eps in config.run.epsilons)}",
        f"- asymptotic model: {'squares expansion' if report.geometry_constants is not None else 'expansion'}"
        if report.factors is not None
        else "- asymptotic model: solver coefficients (no touching factors)",
        "",
        "## Rates",
        "",
        "| quantity | fitted exponent | ± | predicted | agrees |",
        "| --- | --- | --- | --- | --- |",
    ]
    for row in report.fits.itertuples():
        md_lines.append(
            f"| {row.quantity} | {row.exponent:.4f} | {row.half_width:.2g} | {row.predicted:.4f} | "
            f"{'yes' if row.agrees else 'no'} |"
        )
    md_lines += ["", "## Per epsilon", ""]
    columns = ["epsilon", "max_gap_grad", "max_gap_error", "coeff_rel_err", "d_min_eigenvalue"]
    decay = [name for name in quantities.columns if name.startswith("decay_")]
    md_lines.append("| " + " | ".join(columns + decay) + " |")
    md_lines.append("| " + " | ".join("---" for _ in columns + decay) + " |")
    for row in quantities[columns + decay].itertuples(index=False):
        md_lines.append("| " + " | ".join(_number(value) for value in row) + " |")
    md_lines.append("")
    converge = report.coefficients_converge
    if converge is not None:
        md_lines.append(f"Coefficient discrepancy decreases with epsilon: {'yes' if converge else 'no'}")
    if not quantities["rigid_error"].isna().all():
        md_lines.append(f"Largest |grad u - grad psi| over the gap: {quantities['rigid_error'].max():.3e}")
    if report.factors is not None:
        md_lines += [
            "",
            "## Touching configuration",
            "",
            f"- regime: {report.factors.regime.value}, eta = {report.factors.eta:g}",
            f"- D* min eigenvalue: {report.factors.d_min_eigenvalue:.6g}",
        ]
        if report.factors.starred is not None:
            md_lines.append(f"- largest eta/2 change: {report.factors.starred.max_rel_diff:.2e}")
    if report.geometry_constants is not None:
        gc = report.geometry_constants
        md_lines += ["", "| alpha | K* | G* | eta change | r0 change |", "| --- | --- | --- | --- | --- |"]
        for alpha in range(1, 4):
            md_lines.append(
                f"| {alpha} | {_number(gc.K[alpha - 1])} | {_number(gc.G[alpha - 1])} | "
                f"{_number(gc.eta_change[alpha - 1])} | {_number(gc.r0_change[alpha - 1])} |"
            )
    md_lines.append("")
    return "\n".join(md_lines)


def rate_plot(report: SweepReport) -> LogLogPlot:
    plot = LogLogPlot(title=f"{report.config.geometry.shape.value}, m = {report.config.geometry.m:g}")
    quantities = report.quantities
    for name, label in PLOTTED.items():
        plot.add(label, quantities["epsilon"], quantities[name])
        fit = report.rate_fits.get(name)
        if fit is not None:
            eps = quantities["epsilon"].to_numpy()
            plot.add(f"slope {fit.exponent:.3f}", eps, [fit.predict(e) for e in eps], dashed=True)
    return plot


def write_report(report: SweepReport, directory: Path | None = None) -> dict[str, Path]:
    output = report.config.output
    directory = Path(directory or output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": directory / output.metrics,
        "quantities": directory / output.quantities,
        "fits": directory / output.fits,
        "summary": directory / output.summary,
        "plot": directory / output.plot,
    }
    report.metrics.reindex(columns=METRIC_COLUMNS).to_csv(paths["metrics"], index=False, float_format=FLOAT_FORMAT)
    report.quantities.to_csv(paths["quantities"], index=False, float_format=FLOAT_FORMAT)
    report.fits.to_csv(paths["fits"], index=False, float_format=FLOAT_FORMAT)
    paths["summary"].write_text(generate_summary(report), encoding="utf-8")
    try:
        rate_plot(report).write(paths["plot"])
    except ValueError as exc:
        logger.warning(f"no rate plot: {exc}")
        del paths["plot"]
    if report.factors is not None and report.factors.starred is not None:
        paths["factors"] = write_factors(report.factors, directory / output.factors)
    if report.geometry_constants is not None:
        paths["constants"] = directory / "geometry_constants.csv"
        constants_frame(report.geometry_constants).to_csv(paths["constants"], index=False, float_format=FLOAT_FORMAT)
    logger.info(f"wrote sweep results to {directory}")
    return paths


def constants_frame(gc) -> pd.DataFrame:
    keys = ["K", "G", "M_star", "M_tilde", "C_star", "eta_change", "r0_change"]
    return pd.DataFrame({"alpha": [1, 2, 3]} | {key: list(getattr(gc, key)) for key in keys})
