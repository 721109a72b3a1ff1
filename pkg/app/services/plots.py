"""Self-contained SVG line charts."""
from __future__ import annotations

import math
from html import escape
from typing import Sequence

__all__: list[str] = ["line_chart"]

WIDTH, HEIGHT, MARGIN = 640, 400, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _bounds(values: Sequence[float]) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def line_chart(title: str, x_label: str, series: dict[str, tuple[Sequence[float], Sequence[float]]],
               marker_x: float | None = None) -> str:
    """Render named (xs, ys) series; non-finite points are skipped. ``marker_x`` draws a dashed vertical line."""
    all_x = [x for xs, _ in series.values() for x in xs] + ([marker_x] if marker_x is not None else [])
    all_y = [y for _, ys in series.values() for y in ys]
    x_lo, x_hi = _bounds(all_x)
    y_lo, y_hi = _bounds(all_y)
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x: float) -> float:
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>',
        f'<text x="{WIDTH / 2:.1f}" y="{MARGIN / 2:.1f}" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(x_label)}</text>',
        f'<text x="{MARGIN - 6}" y="{HEIGHT - MARGIN:.1f}" text-anchor="end">{y_lo:.3g}</text>',
        f'<text x="{MARGIN - 6}" y="{MARGIN + 4}" text-anchor="end">{y_hi:.3g}</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{x_lo:.3g}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" text-anchor="middle">{x_hi:.3g}</text>',
    ]
    if marker_x is not None:
        parts.append(
            f'<line x1="{sx(marker_x):.2f}" y1="{MARGIN}" x2="{sx(marker_x):.2f}" y2="{HEIGHT - MARGIN}" '
            'stroke="#888" stroke-dasharray="4 4"/>'
        )
    for k, (name, (xs, ys)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y))
        if points:
            parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(
            f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 16 * (k + 1)}" text-anchor="end" fill="{color}">{escape(name)}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
