"""
tandemcal CLI - Typer-based command interface.
"""

from app.cli.app import app

__all__ = ["app"]
