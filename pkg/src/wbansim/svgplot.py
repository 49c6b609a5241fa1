"""Tiny dependency-free SVG line plots.

CSV files are the real output contract; these plots exist so a run can be
eyeballed without any plotting stack installed.  Deterministic output: fixed
palette, fixed formatting, no timestamps.
"""

from __future__ import annotations

import math
from pathlib import Path

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 62, 16, 34, 46


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not math.isfinite(lo) or not math.isfinite(hi):
        return []
    if hi == lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def line_plot(
    series: list[dict],
    path: str | Path,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Write one SVG with a polyline per series.

    Each series is {"label": str, "x": [...], "y": [...]}; NaN points are
    dropped from the polyline but keep their x-slot.
    """
    points = [
        (x, y)
        for s in series
        for x, y in zip(s["x"], s["y"])
        if math.isfinite(x) and math.isfinite(y)
    ]
    if points:
        xs, ys = zip(*points)
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
    else:
        x_lo = x_hi = y_lo = y_hi = 0.0
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    # axes
    out.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333"/>'
    )
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        out.append(
            f'<line x1="{_fmt(px)}" y1="{MARGIN_T + plot_h}" x2="{_fmt(px)}" '
            f'y2="{MARGIN_T + plot_h + 4}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{MARGIN_T + plot_h + 18}" '
            f'text-anchor="middle">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        out.append(
            f'<line x1="{MARGIN_L - 4}" y1="{_fmt(py)}" x2="{MARGIN_L}" '
            f'y2="{_fmt(py)}" stroke="#333"/>'
        )
        out.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(py)}" text-anchor="end" '
            f'dominant-baseline="middle">{_fmt(ty)}</text>'
        )
    out.append(
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 8}" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {HEIGHT / 2})">{ylabel}</text>'
    )

    for idx, s in enumerate(series):
        colour = PALETTE[idx % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(sx(x))},{_fmt(sy(y))}"
            for x, y in zip(s["x"], s["y"])
            if math.isfinite(x) and math.isfinite(y)
        )
        if pts:
            out.append(
                f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>'
            )
        ly = MARGIN_T + 14 + 16 * idx
        out.append(
            f'<line x1="{MARGIN_L + 8}" y1="{ly - 4}" x2="{MARGIN_L + 28}" '
            f'y2="{ly - 4}" stroke="{colour}" stroke-width="1.5"/>'
        )
        out.append(f'<text x="{MARGIN_L + 34}" y="{ly}">{s["label"]}</text>')

    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
