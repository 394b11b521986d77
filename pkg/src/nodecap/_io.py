"""Atomic file output shared by the CSV writers."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temporary sibling and rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(
    columns: Sequence[str],
    rows: Iterable[Sequence[object]],
    header: str | None = None,
    footer: Iterable[str] = (),
) -> str:
    buf = io.StringIO()
    if header is not None:
        buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_csv(path, columns, rows, header=None, footer=()) -> None:
    atomic_write_text(path, format_csv(columns, rows, header=header, footer=footer))


def read_csv(path: str | os.PathLike) -> tuple[list[str], list[dict[str, str]]]:
    """Return (comment lines, data rows) from a CSV written by :func:`write_csv`."""
    comments, body = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            else:
                body.append(line)
    return comments, list(csv.DictReader(body))


def _fmt(v: object) -> object:
    if isinstance(v, float):
        return repr(v)
    return v
