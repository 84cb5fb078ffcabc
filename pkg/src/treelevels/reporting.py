"""Machine-readable outputs: per-replicate CSV, JSON summaries, SVG plots.

The CSV schema is fixed: columns ``replicate_index, n, k_or_m, u, raw_value,
normalized_value``, UTF-8, LF line endings.  Floats are serialized with
``repr`` (shortest round-trip form), so byte-identical inputs give
byte-identical files no matter how the computation was threaded.  Plots are
written as self-contained SVG directly; no plotting library involved.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

CSV_HEADER = "replicate_index,n,k_or_m,u,raw_value,normalized_value"

__all__ = [
    "CSV_HEADER",
    "Row",
    "format_rows_csv",
    "write_csv",
    "write_json",
    "svg_histogram",
    "svg_heatmap",
]


@dataclass(frozen=True)
class Row:
    """One per-replicate record.  ``u`` doubles as the continuous parameter
    slot (the u index for process suites, the time t for moment suites)."""

    replicate_index: int
    n: int | None
    k_or_m: int | None
    u: float | None
    raw_value: float
    normalized_value: float


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def format_rows_csv(rows) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                (
                    _cell(r.replicate_index),
                    _cell(r.n),
                    _cell(r.k_or_m),
                    _cell(r.u),
                    _cell(r.raw_value),
                    _cell(r.normalized_value),
                )
            )
        )
    return "\n".join(lines) + "\n"


def write_csv(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_rows_csv(rows))


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _svg_open(width, height, title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]


def svg_histogram(values, path, title, density=None, bins: int = 60) -> str:
    """Histogram of samples with an optional reference density curve."""
    values = np.asarray(values, dtype=np.float64)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi), density=True)
    width, height = 640, 400
    mx, my = 50, 30
    pw, ph = width - 2 * mx, height - 2 * my
    ymax = counts.max()
    if density is not None:
        xs = np.linspace(lo, hi, 200)
        ys = np.asarray(density(xs), dtype=np.float64)
        ymax = max(ymax, float(ys.max()))
    ymax = ymax * 1.08 or 1.0
    parts = _svg_open(width, height, title)

    def px(x):
        return mx + (x - lo) / (hi - lo) * pw

    def py(y):
        return my + ph - y / ymax * ph

    for c, e0, e1 in zip(counts, edges[:-1], edges[1:]):
        if c <= 0:
            continue
        parts.append(
            f'<rect x="{px(e0):.2f}" y="{py(c):.2f}" '
            f'width="{px(e1) - px(e0):.2f}" height="{py(0) - py(c):.2f}" '
            f'fill="#7aa6d9" stroke="none"/>'
        )
    if density is not None:
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="#c0392b" '
            f'stroke-width="1.5"/>'
        )
    parts.append(
        f'<line x1="{mx}" y1="{py(0):.2f}" x2="{mx + pw}" y2="{py(0):.2f}" '
        f'stroke="black" stroke-width="1"/>'
    )
    for x in np.linspace(lo, hi, 5):
        parts.append(
            f'<text x="{px(x):.2f}" y="{height - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{x:.2g}</text>'
        )
    parts.append("</svg>")
    svg = "\n".join(parts)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    return svg


def svg_heatmap(matrix, path, title, labels=None) -> str:
    """Annotated heatmap of a small matrix (covariance comparisons)."""
    m = np.asarray(matrix, dtype=np.float64)
    rows, cols = m.shape
    cell = 64
    mx, my = 60, 40
    width = mx + cols * cell + 20
    height = my + rows * cell + 20
    vmax = float(np.abs(m).max()) or 1.0
    parts = _svg_open(width, height, title)
    for i in range(rows):
        for j in range(cols):
            v = m[i, j]
            shade = int(255 - min(abs(v) / vmax, 1.0) * 160)
            color = (
                f"rgb({shade},{shade},255)" if v >= 0 else f"rgb(255,{shade},{shade})"
            )
            x, y = mx + j * cell, my + i * cell
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{color}" stroke="#888"/>'
            )
            txt = f"{v:.3g}" if math.isfinite(v) else "nan"
            parts.append(
                f'<text x="{x + cell / 2}" y="{y + cell / 2 + 4}" '
                f'text-anchor="middle" font-family="sans-serif" '
                f'font-size="11">{txt}</text>'
            )
    if labels is not None:
        for j, lab in enumerate(labels):
            parts.append(
                f'<text x="{mx + j * cell + cell / 2}" y="{my - 8}" '
                f'text-anchor="middle" font-family="sans-serif" '
                f'font-size="11">{lab}</text>'
            )
        for i, lab in enumerate(labels):
            parts.append(
                f'<text x="{mx - 8}" y="{my + i * cell + cell / 2 + 4}" '
                f'text-anchor="end" font-family="sans-serif" '
                f'font-size="11">{lab}</text>'
            )
    parts.append("</svg>")
    svg = "\n".join(parts)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    return svg
