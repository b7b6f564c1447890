"""
Rich traceback handler and short failure summaries.

Reference: https://rich.readthedocs.io/en/stable/traceback.html

Locals are hidden unless TANDEMCAL_TRACEBACK_LOCALS=1; numeric arrays in
locals make tracebacks unreadable.
"""

import os
from typing import Optional

from rich.console import Console
from rich.markup import escape
from rich.traceback import install as install_rich_traceback

from .errors import TrialError


def install_traceback_handler(debug: bool = False) -> None:
    """
    Install Rich traceback handler globally.

    Args:
        debug: If True, show more context lines per frame.
    """
    console = Console(stderr=True)

    show_locals = os.getenv("TANDEMCAL_TRACEBACK_LOCALS", "").lower() in (
        "1",
        "true",
        "yes",
    )

    install_rich_traceback(
        console=console,
        show_locals=show_locals,
        locals_max_length=10 if show_locals else 0,
        locals_max_string=80 if show_locals else 0,
        suppress=["typer", "click"],
        width=None,
        extra_lines=3 if debug else 1,
        theme=None,
        word_wrap=True,
    )


def print_failure_summary(
    stage: str, error: BaseException, console: Optional[Console] = None
) -> None:
    """
    Print a two-line failure summary instead of a traceback.

    Args:
        stage: Command or stage where the error surfaced (e.g. "sweep")
        error: The exception that was raised
        console: Optional Console instance (defaults to stderr)
    """
    if console is None:
        console = Console(stderr=True)

    kind = type(error).__name__
    if isinstance(error, TrialError) and error.cause is not None:
        kind = f"{kind} <- {type(error.cause).__name__}"

    console.print(f"[bold red]<x> {stage} | failed ({kind})[/bold red]")
    console.print(f"[red]    cause: {escape(str(error))}[/red]")

    if os.getenv("LOG_LEVEL", "").lower() != "debug":
        console.print("[dim]    run with --debug for full traceback[/dim]")
