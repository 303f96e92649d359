"""File export for histograms and fit reports.

CSV layout: header ``bin_left,bin_right,count,density`` with one row per bin,
UTF-8, LF line endings, floats written with full round-trip precision.
The density column is count / (n_samples * bin_width), so it integrates to
the in-range fraction of the samples.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .stats import FitReport, Histogram

__all__ = ["export_histogram", "write_fit_report", "append_fit_record"]

_HEADER = "bin_left,bin_right,count,density"


def export_histogram(histogram: Histogram, path: str | Path) -> Path:
    """Write one histogram as CSV; an empty histogram yields a header-only file."""
    path = Path(path)
    lines = [_HEADER]
    density = histogram.density
    for left, right, count, dens in zip(
        histogram.edges[:-1], histogram.edges[1:], histogram.counts, density
    ):
        lines.append(f"{float(left)!r},{float(right)!r},{int(count)},{float(dens)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_fit_report(report: FitReport, path: str | Path, label: str | None = None) -> Path:
    """Write one fit report as a flat ``key = value`` text block."""
    path = Path(path)
    record = report.as_dict()
    lines = []
    if label is not None:
        lines.append(f"label = {label}")
    lines.extend(f"{key} = {_format_value(value)}" for key, value in record.items())
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def append_fit_record(report: FitReport, path: str | Path, label: str | None = None) -> Path:
    """Append one fit report as a JSON line (machine-readable variant)."""
    path = Path(path)
    record = {"label": label, **report.as_dict()}
    with path.open("a", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(record) + "\n")
    return path
