"""CSV output of sweep rows.

Floats are written with 17 significant digits so every value reads back to the
same double; missing values are empty cells.
"""

from __future__ import annotations

import csv
import io
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence, TextIO, Type, Union

from pydantic import ValidationError

from core import MixdOutputError

from .records import ROW_TYPES, Row, ScalarRow, columns

logger = logging.getLogger(__name__)


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(
    rows: Sequence[Row], stream: TextIO, row_type: Optional[Type[Row]] = None
) -> None:
    """Write a header and one line per row to an open text stream."""
    row_type = row_type or (type(rows[0]) if rows else ScalarRow)
    header = columns(row_type)
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if not isinstance(row, row_type):
            raise TypeError(f"cannot mix {type(row).__name__} into a {row_type.__name__} table")
        values = row.model_dump()
        writer.writerow([format_cell(values[name]) for name in header])


def render_csv(rows: Sequence[Row], row_type: Optional[Type[Row]] = None) -> str:
    buffer = io.StringIO()
    write_csv(rows, buffer, row_type)
    return buffer.getvalue()


def emit_csv(
    rows: Sequence[Row],
    path: Optional[Union[str, Path]] = None,
    row_type: Optional[Type[Row]] = None,
) -> None:
    """Write rows to ``path``, or to standard output when no path is given.

    An empty row list produces a header-only file.

    Raises:
        MixdOutputError: the file cannot be written.
    """
    if path is None:
        write_csv(rows, sys.stdout, row_type)
        return
    path = Path(path)
    text = render_csv(rows, row_type)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise MixdOutputError(f"Cannot write CSV ({e.strerror})", path) from e
    logger.info(f"Wrote {len(rows)} rows to {path}")


def parse_csv(path: Union[str, Path]) -> List[Row]:
    """Read rows written by :func:`emit_csv`; the header selects the row type.

    Raises:
        MixdOutputError: the file cannot be read or does not hold a known table.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            header: List[str] = next(reader, [])
            lines = list(reader)
    except OSError as e:
        raise MixdOutputError(f"Cannot read CSV ({e.strerror})", path) from e

    row_type = next((t for t in ROW_TYPES if header == columns(t)), None)
    if row_type is None:
        raise MixdOutputError("Unrecognized CSV header", path)
    rows: List[Row] = []
    for number, cells in enumerate(lines, start=2):
        if len(cells) != len(header):
            raise MixdOutputError(f"Line {number} has {len(cells)} cells", path)
        values = {name: (cell if cell != "" else None) for name, cell in zip(header, cells)}
        try:
            rows.append(row_type(**values))
        except ValidationError as e:
            message = f"Line {number} is invalid ({e.error_count()} errors)"
            raise MixdOutputError(message, path) from e
    return rows
