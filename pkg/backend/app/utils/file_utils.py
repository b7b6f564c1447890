"""
File helpers for result and report outputs.
"""

from pathlib import Path
from typing import Union

from app.core.logger import setup_logger

logger = setup_logger(__name__)


def ensure_directory(path: Union[str, Path]) -> Path:
    """
    Ensure directory exists, creating it if necessary.

    Args:
        path: Directory path (can be relative or absolute)

    Returns:
        Path object for the directory
    """
    path_obj = Path(path).expanduser().resolve()
    path_obj.mkdir(parents=True, exist_ok=True)
    logger.debug(f"Ensured directory exists: {path_obj}")
    return path_obj


def ensure_parent(path: Union[str, Path]) -> Path:
    """
    Resolve an output file path and create its parent directory.

    Args:
        path: Output file path

    Returns:
        Resolved Path of the file
    """
    path_obj = Path(path).expanduser().resolve()
    ensure_directory(path_obj.parent)
    return path_obj


def write_text_atomic(path: Union[str, Path], content: str) -> Path:
    """
    Write text through a sibling temp file and rename it into place.

    Readers never see a half-written report.
    """
    target = ensure_parent(path)
    tmp = target.with_name(f".{target.name}.tmp")
    tmp.write_text(content, encoding="utf-8", newline="\n")
    tmp.replace(target)
    logger.debug(f"Wrote {target}")
    return target
