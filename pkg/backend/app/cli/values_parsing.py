"""
Sweep value lists from the --values option.

Pure functions for easy testing. Accepted forms:

    0,0.1,0.2          comma list
    linspace:a:b:n     n evenly spaced points from a to b
    logspace:a:b:n     n points from 10**a to 10**b
    range:a:b          integers a..b inclusive
"""

from typing import List

import numpy as np

from app.core.errors import SweepAxisError


def _number(token: str, source: str) -> float:
    try:
        return float(token.strip())
    except ValueError as e:
        raise SweepAxisError(f"not a number: {token.strip()!r} in {source!r}") from e


def _count(token: str, source: str) -> int:
    try:
        n = int(token.strip())
    except ValueError as e:
        raise SweepAxisError(f"point count must be an integer in {source!r}") from e
    if n < 1:
        raise SweepAxisError(f"point count must be >= 1 in {source!r}")
    return n


def _integer(token: str, source: str) -> int:
    try:
        return int(token.strip())
    except ValueError as e:
        raise SweepAxisError(f"range bounds must be integers in {source!r}") from e


def parse_comma_list(text: str) -> List[float]:
    """Comma-separated numbers; blank items are skipped."""
    values = [_number(part, text) for part in text.split(",") if part.strip()]
    if not values:
        raise SweepAxisError("no values given")
    return values


def parse_values(text: str) -> List[float]:
    """
    Expand a --values argument into the list of axis values.

    Raises:
        SweepAxisError: Malformed or empty value list
    """
    if text is None or not text.strip():
        raise SweepAxisError("no values given")
    spec = text.strip()
    kind, _, rest = spec.partition(":")
    kind = kind.lower()

    if kind in ("linspace", "logspace"):
        parts = rest.split(":")
        if len(parts) != 3:
            raise SweepAxisError(f"expected {kind}:a:b:n, got {spec!r}")
        a, b = _number(parts[0], spec), _number(parts[1], spec)
        n = _count(parts[2], spec)
        grid = np.linspace(a, b, n) if kind == "linspace" else np.logspace(a, b, n)
        return [float(v) for v in grid]

    if kind == "range":
        parts = rest.split(":")
        if len(parts) != 2:
            raise SweepAxisError(f"expected range:a:b, got {spec!r}")
        lo, hi = _integer(parts[0], spec), _integer(parts[1], spec)
        if hi < lo:
            raise SweepAxisError(f"empty range in {spec!r}")
        return [float(v) for v in range(lo, hi + 1)]

    return parse_comma_list(spec)
