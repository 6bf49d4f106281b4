"""SVG summary plots of sweep rows."""

from __future__ import annotations

import logging
import re
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from matplotlib import rc_context
from matplotlib.figure import Figure

from core import MixdOutputError

from .records import AmpRow, Row, ScalarRow

logger = logging.getLogger(__name__)

PALETTE = [
    "#2E7D32",  # Green
    "#C62828",  # Red
    "#1565C0",  # Blue
    "#6A1B9A",  # Purple
    "#EF6C00",  # Orange
    "#00695C",  # Teal
    "#880E4F",  # Pink
]
HASH_SALT = "mixd-bench"

Series = Dict[str, List[Tuple[float, float]]]


def series_id(label: str) -> str:
    """SVG group id for a series label."""
    return "series-" + re.sub(r"[^A-Za-z0-9_.-]+", "-", label).strip("-")


def _scalar_series(rows: Sequence[ScalarRow]) -> Series:
    series: Series = OrderedDict()
    for row in rows:
        series.setdefault(row.method, []).append((float(row.n), row.excess_mse))
    return series


def _amp_series(rows: Sequence[AmpRow]) -> Tuple[Series, Series]:
    """Measured SDR per denoiser and the SE reference, against M/N."""
    several_snrs = len({row.snr_db for row in rows}) > 1
    measured: Series = OrderedDict()
    reference: Series = OrderedDict()
    for row in rows:
        suffix = f" {row.snr_db:g}dB" if several_snrs else ""
        delta = row.m / row.n
        if row.sdr_db is not None:
            measured.setdefault(row.denoiser + suffix, []).append((delta, row.sdr_db))
        if row.se_sdr_db is not None and row.denoiser != "se":
            points = reference.setdefault("se" + suffix, [])
            if (delta, row.se_sdr_db) not in points:
                points.append((delta, row.se_sdr_db))
    return measured, reference


def _draw(figure: Figure, rows: Sequence[Row]) -> None:
    ax = figure.add_subplot()
    if isinstance(rows[0], ScalarRow):
        measured = _scalar_series([r for r in rows if isinstance(r, ScalarRow)])
        reference: Series = OrderedDict()
        ax.set_xscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel("excess MSE over MMSE")
    else:
        measured, reference = _amp_series([r for r in rows if isinstance(r, AmpRow)])
        ax.set_xlabel("M / N")
        ax.set_ylabel("SDR (dB)")

    for index, (label, points) in enumerate(measured.items()):
        xs, ys = zip(*sorted(points))
        color = PALETTE[index % len(PALETTE)]
        ax.plot(xs, ys, marker="o", color=color, label=label, gid=series_id(label))
    for label, points in reference.items():
        xs, ys = zip(*sorted(points))
        ax.plot(xs, ys, linestyle="--", color="#424242", label=label, gid=series_id(label))
    ax.grid(True, alpha=0.3)
    if measured or reference:
        ax.legend()


def emit_svg(rows: Sequence[Row], path: Union[str, Path]) -> None:
    """Plot sweep rows to an SVG file that is byte-identical for identical rows.

    Scalar sweeps plot excess MSE against N on a log axis; matrix sweeps plot
    SDR against M/N with the state-evolution prediction dashed.

    Raises:
        MixdOutputError: the file cannot be written.
    """
    path = Path(path)
    figure = Figure(figsize=(6.4, 4.8))
    with rc_context({"svg.hashsalt": HASH_SALT}):
        if rows:
            _draw(figure, rows)
        else:
            figure.add_subplot()
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            figure.savefig(path, format="svg", metadata={"Date": None})
        except OSError as e:
            raise MixdOutputError(f"Cannot write SVG ({e.strerror})", path) from e
    logger.info(f"Wrote plot to {path}")
