"""
Report console using Rich for stage lines, progress and result tables.
"""

import os
from typing import Iterable, Optional, Sequence, Tuple

from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    Progress,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.rule import Rule
from rich.table import Table


class ReportConsole:
    """
    Centralized console for command output.

    Provides stage messages, a sweep progress bar, saved-file boxes and
    failure lines while respecting --plain mode and NO_COLOR.
    """

    # Stage sigils
    SIGILS = {
        "config": "⊢",
        "calibrate": "⟁",
        "search": "⌬",
        "estimate": "◇",
        "sweep": "⚗",
        "selftest": "⧈",
        "inspect": "⌘",
        "report": "■",
    }

    # Non-emoji spinners; reference: python -m rich.spinner
    SPINNER_MAP = {
        "config": "dots",
        "calibrate": "dots3",
        "search": "dots2",
        "estimate": "dots4",
        "sweep": "arc",
        "selftest": "toggle11",
        "inspect": "dots",
        "report": "toggle3",
    }

    def __init__(self, plain: bool = False):
        """
        Args:
            plain: If True, disable colors and animations (for CI/logs)
        """
        self.plain = plain or os.getenv("NO_COLOR", "").lower() in ("1", "true", "yes")

        self.console = Console(force_terminal=not self.plain, no_color=self.plain)
        self.err_console = Console(
            stderr=True, force_terminal=not self.plain, no_color=self.plain
        )

        self.colors = {
            "success": "green" if not self.plain else None,
            "processing": "cyan" if not self.plain else None,
            "warning": "yellow" if not self.plain else None,
            "error": "bold red" if not self.plain else None,
        }

    def print_stage(
        self,
        stage: str,
        message: str,
        status: Optional[str] = None,
        style: Optional[str] = None,
    ) -> None:
        """
        Print stage message with sigil.

        Args:
            stage: Stage name (e.g., "calibrate", "sweep")
            message: Message text
            status: Optional status text
            style: Optional style (success, processing, warning, error)
        """
        sigil = self.SIGILS.get(stage, "")
        text = f"{sigil} {message} | {status}" if status else f"{sigil} {message}"
        style_val = self.colors.get(style) if style else None
        if style_val:
            self.console.print(text, style=style_val)
        else:
            self.console.print(text)

    def stage_status(self, stage: str, message: str):
        """
        Status spinner for a stage; use as a context manager.

        Returns:
            Console status context manager
        """
        sigil = self.SIGILS.get(stage, "")
        return self.console.status(
            f"[bold]{sigil}[/bold] {message}",
            spinner=self.SPINNER_MAP.get(stage, "dots"),
            spinner_style="cyan" if not self.plain else None,
        )

    def stage_ok(
        self, stage: str, message: str, duration: Optional[str] = None
    ) -> None:
        """
        Print a stage success line with uniform alignment.

        Args:
            stage: Stage name
            message: Success message
            duration: Optional duration (e.g., "0:12")
        """
        sigil = self.SIGILS.get(stage, "")

        t = Table.grid(padding=(0, 1))
        t.add_column(width=2, style="bold")
        t.add_column(width=10, style="bold")
        t.add_column()

        tail = f" [dim]{duration}[/dim]" if duration else ""
        t.add_row(sigil, stage, f"[green]✓[/green] {message}{tail}")
        self.console.print(t)

    def stage_fail(self, stage: str, message: str) -> None:
        """Print a stage failure line aligned with stage_ok."""
        sigil = self.SIGILS.get(stage, "")

        t = Table.grid(padding=(0, 1))
        t.add_column(width=2, style="bold")
        t.add_column(width=10, style="bold")
        t.add_column()

        t.add_row(sigil, stage, f"[red]✗[/red] {message}")
        self.console.print(t)

    def print_divider(self) -> None:
        self.console.print(Rule(characters="─", style="dim"))

    def create_progress_context(self, stage: str) -> Progress:
        """
        Rich Progress for a known number of trials.

        Reference: https://rich.readthedocs.io/en/stable/progress.html
        """
        sigil = self.SIGILS.get(stage, "")
        columns = [
            TextColumn(f"[bold]{sigil}[/bold]"),
            TextColumn("[bold]{task.fields[stage]}[/bold]"),
            BarColumn(bar_width=None, complete_style="green", finished_style="green"),
            TaskProgressColumn(),
            TextColumn("|"),
            TextColumn("[progress.description]{task.description}"),
            TimeElapsedColumn(),
            TimeRemainingColumn(),
        ]
        return Progress(
            *columns,
            console=self.console,
            transient=False,
            expand=True,
            disable=self.plain,
        )

    def add_progress_task(
        self, progress: Progress, stage: str, total: int, description: str = ""
    ) -> int:
        """
        Add a task to a progress context.

        Returns:
            Task ID
        """
        return progress.add_task(
            description=description or "starting",
            total=total,
            stage=stage,
        )

    def print_table(
        self,
        title: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[str]],
    ) -> None:
        """Print a simple table; the first column is bold."""
        table = Table(title=title, show_header=True, header_style="bold")
        for i, name in enumerate(columns):
            table.add_column(name, style="bold" if i == 0 else None, no_wrap=i == 0)
        for row in rows:
            table.add_row(*row)
        self.console.print(table)

    def print_saved(self, items: Sequence[Tuple[str, str]]) -> None:
        """
        Print a box listing written files.

        Args:
            items: (label, path) pairs
        """
        if not items:
            return
        content = "\n".join(
            f"[bold][■][/bold] {label} saved → [dim]{path}[/dim]"
            for label, path in items
        )
        panel_style = self.colors["success"] or "default"
        self.console.print(
            Panel.fit(content, title="SAVED", border_style=panel_style, padding=(0, 1))
        )

    def print_failure(self, stage: str, cause: str) -> None:
        """
        Print a stage failure to stderr.

        Args:
            stage: Stage name where the error occurred
            cause: Error cause/message
        """
        style = self.colors["error"]
        self.err_console.print(f"<x> {stage} | failed", style=style, soft_wrap=True)
        self.err_console.print(
            f"    └─ cause: {escape(cause)}", style=style, soft_wrap=True
        )
