"""
Package-native CLI entry point for tandemcal.

Used by the installed console scripts (tandemcal, tcal). No sys.path modification.
"""

import os
import sys


def _is_debug_mode(argv: list[str]) -> bool:
    """Resolve debug mode from CLI flag or env (including a project .env)."""
    if "--debug" in argv:
        return True
    try:
        from app.core.config_manager import load_environment

        load_environment()
    except Exception:
        pass
    return os.getenv("LOG_LEVEL", "").lower() == "debug"


def main() -> None:
    """Entry point for tandemcal/tcal console scripts."""
    debug_mode = _is_debug_mode(sys.argv)
    from app.core.tracebacks import install_traceback_handler, print_failure_summary

    install_traceback_handler(debug=debug_mode)

    from app.cli.app import app

    try:
        app()
    except KeyboardInterrupt:
        from rich.console import Console

        Console(stderr=True).print("\n[dim]Interrupted.[/dim]")
        sys.exit(130)
    except Exception as e:
        if debug_mode:
            raise
        commands = [a for a in sys.argv[1:] if not a.startswith("-")]
        print_failure_summary(commands[0] if commands else "main", e)
        sys.exit(1)
