"""Deterministic text serialization helpers.

All artifacts are plain text written through these functions so that repeated
runs with identical inputs produce byte-identical files: floats use repr of
the Python float (shortest round-trip form), rows end with a single newline,
and writes go through a temp file + rename.
"""

from __future__ import annotations

import os
from pathlib import Path


def fmt(value) -> str:
    """Canonical text form: round-trip repr for floats, str otherwise."""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, str)):
        return str(value)
    return repr(float(value))


def atomic_write_text(path, text: str) -> None:
    """Write text to `path` via a sibling temp file and atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_csv(path, header: list[str], rows) -> None:
    """Write a CSV with canonical float formatting and a trailing newline."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV written by write_csv; returns (header, raw string rows)."""
    lines = Path(path).read_text().strip("\n").split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows
