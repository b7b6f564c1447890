"""
Helpers shared by the command modules.
"""

import os
from typing import Optional

import typer

from app.cli.output import ReportConsole
from app.core.config_manager import ConfigManager
from app.core.errors import TandemcalError
from app.core.model import SystemConfig


def debug_enabled() -> bool:
    return os.getenv("LOG_LEVEL", "").lower() == "debug"


def fail(console: ReportConsole, stage: str, error: BaseException) -> None:
    """
    Report an expected failure and exit 1.

    Under --debug the error is re-raised so the entrypoint shows the traceback.
    """
    if debug_enabled():
        raise error
    console.print_failure(stage, f"{type(error).__name__}: {error}")
    raise typer.Exit(code=1)


def load_config(
    console: ReportConsole, config_path: Optional[str], seed: Optional[int] = None
) -> SystemConfig:
    """Resolve and load the experiment config, applying a --seed override."""
    try:
        manager = ConfigManager(config_path)
        with console.stage_status("config", "loading config..."):
            config = manager.load()
        if seed is not None:
            config = config.replace(master_seed=seed)
    except TandemcalError as e:
        fail(console, "config", e)
    source = str(manager.config_path) if manager.exists() else "built-in defaults"
    console.stage_ok("config", source)
    return config
