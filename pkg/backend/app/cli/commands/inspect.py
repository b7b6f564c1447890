"""
Inspect command - Validate and display a sweep CSV.
"""

from pathlib import Path

import typer
from rich.panel import Panel
from rich.table import Table

from app.cli.output import ReportConsole
from app.core.harness import CSV_HEADER, read_csv
from app.core.logger import setup_logger

logger = setup_logger(__name__)


def inspect(
    file_path: str = typer.Argument(..., help="Sweep CSV to inspect"),
) -> None:
    """
    Check a sweep CSV's header and show its rows.
    """
    console = ReportConsole()

    file = Path(file_path)
    if not file.exists():
        console.print_failure("inspect", f"file not found: {file_path}")
        raise typer.Exit(code=1)

    if not file.is_file():
        console.print_failure("inspect", f"path is not a file: {file_path}")
        raise typer.Exit(code=1)

    try:
        rows = read_csv(file)
    except (ValueError, UnicodeDecodeError) as e:
        console.print_failure("inspect", str(e))
        raise typer.Exit(code=1)

    table = Table(
        title=f"{file.name}: {len(rows)} rows", show_header=True, header_style="bold"
    )
    for name in CSV_HEADER:
        table.add_column(name, justify="right", no_wrap=True)
    for row in rows:
        table.add_row(*(row[name] for name in CSV_HEADER))

    console.console.print()
    border = console.colors["success"] or "default"
    console.console.print(Panel(table, border_style=border))
    console.console.print()
