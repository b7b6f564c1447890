"""
Root Typer app for the tandemcal CLI.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Optional

import typer

from app.core.logger import refresh_log_levels


def _get_version() -> str:
    """Single source of truth: installed package metadata, or dev fallback."""
    try:
        from importlib.metadata import version

        return version("tandemcal")
    except Exception:
        return "0.0.0+dev"


VERSION = _get_version()


def get_app_name() -> str:
    """Detect app name from how the binary was invoked."""
    if len(sys.argv) > 0:
        binary_name = Path(sys.argv[0]).name.replace(".exe", "")
        if binary_name in ("tcal", "tandemcal"):
            return binary_name
    return "tandemcal"


APP_NAME = get_app_name()

app = typer.Typer(
    name=APP_NAME,
    help="Reciprocity calibration simulator for hybrid-beamforming cooperative APs",
    add_completion=False,
    no_args_is_help=True,
)

from app.cli.commands import calibrate, config, inspect, selftest, sweep  # noqa: E402

app.command("calibrate", help="Calibrate one AP-user link and write a TOML report")(
    calibrate.calibrate
)
app.command("sweep", help="Monte Carlo parameter sweep written as CSV")(sweep.sweep)
app.command("selftest", help="Run the built-in self checks")(selftest.selftest)
app.command("inspect", help="Validate and display a sweep CSV")(inspect.inspect)
app.add_typer(
    config.app, name="config", help="Create, show and locate the experiment config"
)


def version_callback(value: bool) -> None:
    """Display version information."""
    if value:
        typer.echo(f"tandemcal {VERSION}")
        raise typer.Exit()


@app.callback()
def main(
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        "-v",
        callback=version_callback,
        help="Show version and exit",
        is_eager=True,
    ),
    debug: bool = typer.Option(
        False, "--debug", help="Debug logging and full tracebacks"
    ),
    verbose: bool = typer.Option(False, "--verbose", help="Show INFO logs"),
    plain: bool = typer.Option(
        False, "--plain", help="Disable colors and progress bars"
    ),
) -> None:
    """
    Reciprocity calibration for distributed hybrid-beamforming MIMO.

    Simulates the digital and analog calibration of access points and users,
    the inter-AP ratio exchange and cooperative zero-forcing, and sweeps
    scenario parameters into CSV tables.
    """
    if debug:
        os.environ["LOG_LEVEL"] = "debug"
        logging.captureWarnings(True)
    if plain:
        os.environ["NO_COLOR"] = "1"
    if debug or verbose:
        refresh_log_levels(verbose=verbose)
