import logging
import os
from contextlib import contextmanager
from time import monotonic

import typer
from rich.progress import Progress, SpinnerColumn, TextColumn

THREADS_ENV = "LAMEGAP_THREADS"


def log_init(debug: bool = False):
    """Configure logging for the CLI.

    The `lamegap` loggers log at INFO (DEBUG with `--debug`); chatty third-party
    libraries are kept at WARNING.
    """
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s:%(name)s:%(message)s")

    loggers_config = {
        "lamegap": level,
        "tqdm": logging.WARNING,
        "matplotlib": logging.WARNING,
        "numexpr": logging.WARNING,
    }
    for logger_name, logger_level in loggers_config.items():
        logging.getLogger(logger_name).setLevel(logger_level)


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else `LAMEGAP_THREADS`, else 1."""
    if threads is not None:
        if threads < 1:
            raise ValueError(f"thread count must be positive, got {threads}")
        return threads
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be positive, got {value}")
    return value


@contextmanager
def loading(message: str, quiet: bool = False):
    """Show a Rich spinner for a long-running stage.

    Args:
        message: Message to display
        quiet: Skip the spinner and the completion line (used by tests and nested stages)
    """
    if quiet:
        yield
        return

    start_at = monotonic()
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        transient=True,
    ) as progress:
        progress.add_task(description=message, total=None)
        yield

    duration = monotonic() - start_at
    typer.secho(f"✅ {message} completed in {duration:.2f}s", fg=typer.colors.GREEN)
