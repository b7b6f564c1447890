"""
Sweep command - Monte Carlo parameter sweep written as CSV.
"""

import time
from pathlib import Path
from typing import Optional

import typer

from app.cli.commands.common import fail, load_config
from app.cli.output import ReportConsole
from app.cli.values_parsing import parse_values
from app.core.config_manager import default_workers
from app.core.errors import TandemcalError
from app.core.harness import AXES, axis_config, write_csv
from app.core.harness import sweep as run_sweep
from app.core.logger import setup_logger

logger = setup_logger(__name__)


def sweep(
    config_path: Optional[str] = typer.Option(
        None, "--config", "-c", help="Experiment config file"
    ),
    axis: str = typer.Option(
        ..., "--axis", "-a", help=f"Swept parameter: {', '.join(AXES)}"
    ),
    values: str = typer.Option(
        ...,
        "--values",
        help="Comma list, linspace:a:b:n, logspace:a:b:n or range:a:b",
    ),
    out: Path = typer.Option(..., "--out", "-o", help="CSV output path"),
    trials: Optional[int] = typer.Option(
        None, "--trials", "-n", min=1, help="Override num_trials"
    ),
    workers: Optional[int] = typer.Option(
        None,
        "--workers",
        "-w",
        min=1,
        help="Worker processes (default: TANDEMCAL_WORKERS or 1)",
    ),
) -> None:
    """
    Sweep one parameter and average num_trials trials per value.

    Writes one CSV row per value with mean calibration MSEs, mean sum rates
    of the perfect, calibrated and uncalibrated precoders, and the pilot count.
    """
    console = ReportConsole()
    config = load_config(console, config_path)

    try:
        if trials is not None:
            config = config.replace(num_trials=trials)
        points = parse_values(values)
        for value in points:
            axis_config(config, axis, value)
        pool = workers if workers is not None else default_workers()
    except TandemcalError as e:
        fail(console, "sweep", e)

    total = len(points) * config.num_trials
    console.print_stage(
        "sweep",
        f"{axis}: {len(points)} values x {config.num_trials} trials",
        status=f"{pool} worker{'s' if pool != 1 else ''}",
    )

    started = time.monotonic()
    try:
        with console.create_progress_context("sweep") as progress:
            task = console.add_progress_task(progress, "sweep", total, "trials")
            rows = run_sweep(
                config,
                axis,
                points,
                workers=pool,
                on_trial=lambda n: progress.advance(task, n),
            )
    except TandemcalError as e:
        fail(console, "sweep", e)
    elapsed = time.monotonic() - started
    console.stage_ok("sweep", f"{total} trials", duration=f"{elapsed:.1f}s")

    console.print_table(
        f"Sweep over {axis}",
        ["value", "rate perfect", "rate calibrated", "rate uncalibrated", "MSE α"],
        (
            [
                f"{row.axis_value:.6g}",
                f"{row.sum_rate_perfect:.4f}",
                f"{row.sum_rate_calibrated:.4f}",
                f"{row.sum_rate_uncalibrated:.4f}",
                f"{row.mse_alpha:.3e}",
            ]
            for row in rows
        ),
    )

    try:
        path = write_csv(rows, out)
    except OSError as e:
        fail(console, "report", e)
    console.print_saved([("csv", str(path))])
