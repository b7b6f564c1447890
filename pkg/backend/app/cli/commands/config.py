"""
Config command - Create, show and locate the experiment config.
"""

from typing import Optional

import typer

from app.cli.commands.common import fail
from app.cli.output import ReportConsole
from app.core.config_manager import CONFIG_ENV, ConfigManager
from app.core.errors import TandemcalError
from app.core.toml_config import KEY_COMMENTS

# Create Typer app for config subcommands
app = typer.Typer(
    name="config",
    help="Create, show and locate the experiment config",
    no_args_is_help=True,
)


@app.command("init")
def config_init(
    path: Optional[str] = typer.Argument(
        None, help="Where to write (default: the resolved config location)"
    ),
    force: bool = typer.Option(False, "--force", "-f", help="Overwrite existing file"),
) -> None:
    """
    Write a commented config holding the built-in defaults.
    """
    console = ReportConsole()
    try:
        written = ConfigManager(path).write_default(force=force)
    except (TandemcalError, OSError) as e:
        fail(console, "config", e)
    console.print_saved([("config", str(written))])


@app.command("show")
def config_show(
    config_path: Optional[str] = typer.Option(
        None, "--config", "-c", help="Experiment config file"
    ),
) -> None:
    """
    Show the resolved config, key by key.

    Values come from the file when it exists, otherwise from the defaults.
    """
    console = ReportConsole()
    manager = ConfigManager(config_path)
    try:
        config = manager.load()
    except TandemcalError as e:
        fail(console, "config", e)

    source = str(manager.config_path) if manager.exists() else "built-in defaults"
    console.print_table(
        f"Configuration ({source})",
        ["Key", "Value", "Meaning"],
        (
            [name, str(value), f"[dim]{KEY_COMMENTS[name]}[/dim]"]
            for name, value in config.as_dict().items()
        ),
    )


@app.command("path")
def config_location(
    config_path: Optional[str] = typer.Option(
        None, "--config", "-c", help="Experiment config file"
    ),
) -> None:
    """
    Print the config location that commands would read.

    Resolution order: --config, then $TANDEMCAL_CONFIG (or .env), then the
    per-user config directory.
    """
    manager = ConfigManager(config_path)
    state = "" if manager.exists() else " (missing)"
    typer.echo(f"{manager.config_path}{state}")
    if not config_path:
        typer.echo(f"override with --config or {CONFIG_ENV}", err=True)
