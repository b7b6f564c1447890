"""
Structured logging with DEBUG/INFO levels via LOG_LEVEL env var.
Uses RichHandler for clean, styled log output that doesn't interfere with progress bars.
"""

from __future__ import annotations

import logging
import os
from typing import TYPE_CHECKING, Optional

from rich.console import Console
from rich.logging import RichHandler

if TYPE_CHECKING:
    import numpy as np


def _resolve_level(verbose: bool) -> int:
    log_level_str = os.getenv("LOG_LEVEL", "info").lower()
    verbose_mode = verbose or os.getenv("VERBOSE", "").lower() in ("1", "true", "yes")

    # Default mode: WARNING and above only
    if not verbose_mode and log_level_str != "debug":
        return logging.WARNING
    return logging.DEBUG if log_level_str == "debug" else logging.INFO


def setup_logger(
    name: str = __name__,
    console: Optional[Console] = None,
    verbose: bool = False,
) -> logging.Logger:
    """
    Set up structured logging with LOG_LEVEL env var support.

    Args:
        name: Logger name (typically __name__)
        console: Optional Rich Console instance (stderr console created if not provided)
        verbose: If True, show INFO logs even in default mode.

    Returns:
        Configured logger instance
    """
    log_level = _resolve_level(verbose)

    logger = logging.getLogger(name)
    logger.setLevel(log_level)

    # Avoid adding multiple handlers if logger already configured
    if not logger.handlers:
        handler = RichHandler(
            console=console or Console(stderr=True),
            rich_tracebacks=True,
            show_time=False,
            show_level=True,
            show_path=False,
            markup=True,
        )
        handler.setLevel(log_level)
        logger.addHandler(handler)
        logger.propagate = False
    else:
        for handler in logger.handlers:
            handler.setLevel(log_level)

    return logger


def refresh_log_levels(verbose: bool = False) -> None:
    """
    Re-apply LOG_LEVEL/VERBOSE to every tandemcal logger.

    Module loggers are created at import time, before the CLI has parsed
    --debug/--verbose, so the root callback calls this once flags are known.
    """
    log_level = _resolve_level(verbose)
    for name, candidate in logging.Logger.manager.loggerDict.items():
        if not name.startswith("app") or not isinstance(candidate, logging.Logger):
            continue
        candidate.setLevel(log_level)
        for handler in candidate.handlers:
            handler.setLevel(log_level)


def format_vector(values: "np.ndarray", precision: int = 4) -> str:
    """Compact complex-vector rendering for debug lines."""
    parts = [f"{v.real:.{precision}g}{v.imag:+.{precision}g}j" for v in values]
    if len(parts) > 6:
        parts = parts[:3] + ["..."] + parts[-2:]
    return "[" + ", ".join(parts) + "]"


# Module-level logger
_logger = setup_logger(__name__)
