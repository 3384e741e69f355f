from contextlib import contextmanager
from pathlib import Path
from textwrap import dedent
from typing import Optional

import pandas as pd
import rich
import typer
from dotenv import load_dotenv
from rich.table import Table

from lamegap.errors import ConfigError, NumericalError
from lamegap.harness import (
    ExperimentConfig,
    load_config,
    parse_list,
    run_asymptotic,
    run_factors,
    run_solve,
    run_squares,
    run_sweep,
    write_report,
)
from lamegap.utils import loading, log_init

cli = typer.Typer(rich_markup_mode="markdown", no_args_is_help=True)

CONFIG_OPTION = typer.Option(None, "--config", help="Experiment configuration file (INI sections)")
OUT_OPTION = typer.Option(None, "--out", help="Output directory, overrides [output] directory")
EPS_OPTION = typer.Option(None, "--eps", help="Gap distances, e.g. `1e-2,10^-2.5,1e-3`")
LEVEL_OPTION = typer.Option(None, "--mesh-level", min=0, help="Mesh refinement level")
ETA_OPTION = typer.Option(None, "--eta", help="Cusp cutoff of the touching configuration")
THREADS_OPTION = typer.Option(None, "--threads", min=1, help="Worker threads (else LAMEGAP_THREADS, else 1)")
DEBUG_OPTION = typer.Option(False, "--debug", help="Log at DEBUG level")


@contextmanager
def reported_errors():
    """Map library failures to exit codes: 2 for configuration, 3 for numerics."""
    try:
        yield
    except ConfigError as exc:
        typer.secho(f"❌ Configuration error: {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=2)
    except NumericalError as exc:
        stage = exc.stage or "unknown"
        typer.secho(f"❌ Numerical failure in stage '{stage}': {exc}", fg=typer.colors.RED, err=True)
        raise typer.Exit(code=3)


def prepare(
    config: Optional[Path],
    out: Optional[Path],
    eps: Optional[str],
    mesh_level: Optional[int],
    eta: Optional[float],
    threads: Optional[int],
    debug: bool,
) -> ExperimentConfig:
    load_dotenv()
    log_init(debug)
    experiment = load_config(config) if config is not None else ExperimentConfig()
    epsilons = None
    if eps is not None:
        try:
            epsilons = parse_list(eps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return experiment.with_overrides(epsilons=epsilons, mesh_level=mesh_level, eta=eta, threads=threads, out=out)


def show_frame(frame: pd.DataFrame, title: str):
    table = Table(title=title)
    for column in frame.columns:
        table.add_column(str(column))
    for row in frame.itertuples(index=False):
        table.add_row(*(f"{value:.6g}" if isinstance(value, float) else str(value) for value in row))
    rich.print(table)


@cli.command(help="Solve the limit problem at the first gap distance and dump the displacement field.")
def solve(
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    eps: Optional[str] = EPS_OPTION,
    mesh_level: Optional[int] = LEVEL_OPTION,
    eta: Optional[float] = ETA_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    debug: bool = DEBUG_OPTION,
):
    with reported_errors():
        experiment = prepare(config, out, eps, mesh_level, eta, threads, debug)
        with loading(f"Solving at epsilon={experiment.run.epsilons[0]:g}"):
            result = run_solve(experiment)
    rich.print_json(data=result.stats)
    for name, path in result.paths.items():
        typer.echo(f"📝 {name}: {path}")


@cli.command(help="Solve the touching configuration at eta and eta/2 and dump the blow-up factor matrices.")
def factors(
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    eps: Optional[str] = EPS_OPTION,
    mesh_level: Optional[int] = LEVEL_OPTION,
    eta: Optional[float] = ETA_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    debug: bool = DEBUG_OPTION,
):
    with reported_errors():
        experiment = prepare(config, out, eps, mesh_level, eta, threads, debug)
        with loading(f"Touching configuration at eta={experiment.run.eta:g}"):
            matrices, path = run_factors(experiment)
    typer.echo(f"{matrices.regime.value} regime, D* min eigenvalue {matrices.d_min_eigenvalue:.6g}")
    typer.echo(f"📝 factors: {path}")


@cli.command(help="Evaluate the leading coefficients and pointwise bounds at every gap distance.")
def asymptotic(
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    eps: Optional[str] = EPS_OPTION,
    mesh_level: Optional[int] = LEVEL_OPTION,
    eta: Optional[float] = ETA_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    debug: bool = DEBUG_OPTION,
):
    with reported_errors():
        experiment = prepare(config, out, eps, mesh_level, eta, threads, debug)
        with loading("Evaluating the asymptotic formulas"):
            frame, path = run_asymptotic(experiment)
    show_frame(frame, "Leading coefficients C1 - C2")
    typer.echo(f"📝 coefficients: {path}")


@cli.command(
    help=dedent(
        """
        Full study: solve at every gap distance, compare with the asymptotic field and fit the rates.

        Writes the metrics CSV, per-epsilon quantities, rate fits, a markdown summary and a log-log SVG plot.
        """
    )
)
def sweep(
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    eps: Optional[str] = EPS_OPTION,
    mesh_level: Optional[int] = LEVEL_OPTION,
    eta: Optional[float] = ETA_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    debug: bool = DEBUG_OPTION,
):
    with reported_errors():
        experiment = prepare(config, out, eps, mesh_level, eta, threads, debug)
        report = run_sweep(experiment)
        paths = write_report(report)
    show_frame(report.fits, "Fitted against predicted exponents")
    for name, path in paths.items():
        typer.echo(f"📝 {name}: {path}")


@cli.command(help="Curvilinear squares end to end: geometry constants, refined expansion and the sweep.")
def squares(
    config: Optional[Path] = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    eps: Optional[str] = EPS_OPTION,
    mesh_level: Optional[int] = LEVEL_OPTION,
    eta: Optional[float] = ETA_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    debug: bool = DEBUG_OPTION,
):
    with reported_errors():
        experiment = prepare(config, out, eps, mesh_level, eta, threads, debug)
        report, paths = run_squares(experiment)
    show_frame(report.fits, "Fitted against predicted exponents")
    for name, path in paths.items():
        typer.echo(f"📝 {name}: {path}")


if __name__ == "__main__":
    cli()
