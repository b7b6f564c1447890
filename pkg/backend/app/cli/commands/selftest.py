"""
Selftest command - Planted-solution, pilot-budget and oracle checks.
"""

import time

import typer

from app.cli.output import ReportConsole
from app.core.logger import setup_logger
from app.core.selftest import run_selftest

logger = setup_logger(__name__)


def selftest(
    quick: bool = typer.Option(
        False, "--quick", "-q", help="One planted trial and fewer oracle instances"
    ),
) -> None:
    """
    Run the built-in self checks.

    Exits 0 when every check passes and 1 otherwise.
    """
    console = ReportConsole()

    started = time.monotonic()
    with console.stage_status("selftest", "running self checks..."):
        results = run_selftest(quick=quick)
    elapsed = f"{time.monotonic() - started:.1f}s"

    console.print_table(
        "Self checks",
        ["Check", "Result", "Detail"],
        (
            [r.name, "[green]pass[/green]" if r.passed else "[red]FAIL[/red]", r.detail]
            for r in results
        ),
    )

    failed = sum(1 for r in results if not r.passed)
    if failed:
        console.stage_fail("selftest", f"{failed} of {len(results)} checks failed")
        raise typer.Exit(code=1)
    console.stage_ok("selftest", f"{len(results)} checks passed", duration=elapsed)
