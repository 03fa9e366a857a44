"""Minimal self-contained SVG rendering for line charts and heatmaps.

Output is plain text with fixed number formatting, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
WIDTH, HEIGHT = 640, 400
MARGIN = 60


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _text(x, y, s, anchor="middle", size=12) -> str:
    return f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" text-anchor="{anchor}">{escape(str(s))}</text>'


def _wrap(body: list[str], title: str, width=WIDTH, height=HEIGHT) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', _text(width / 2, 24, title, size=14),
                      *body, "</svg>", ""])


def _range(values: Sequence[float]) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if hi == lo:
        pad = abs(lo) * 0.05 or 0.5
        return lo - pad, hi + pad
    return lo, hi


def line_chart(series: dict[str, tuple[Sequence[float], Sequence[float]]], title: str,
               xlabel: str = "", ylabel: str = "") -> str:
    """One polyline per named ``(x, y)`` series on shared linear axes."""
    xs = [x for xv, _ in series.values() for x in xv]
    ys = [y for _, yv in series.values() for y in yv]
    x0, x1 = _range(xs)
    y0, y1 = _range(ys)
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    body = [
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
        _text(MARGIN, HEIGHT - MARGIN + 16, f"{x0:g}"), _text(WIDTH - MARGIN, HEIGHT - MARGIN + 16, f"{x1:g}"),
        _text(MARGIN - 6, HEIGHT - MARGIN, f"{y0:.3g}", anchor="end"), _text(MARGIN - 6, MARGIN + 4, f"{y1:.3g}", anchor="end"),
        _text(WIDTH / 2, HEIGHT - 16, xlabel),
        f'<text x="16" y="{HEIGHT / 2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {HEIGHT / 2})">'
        f"{escape(ylabel)}</text>",
    ]
    for i, (name, (xv, yv)) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xv, yv) if math.isfinite(y))
        body.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        body.append(_text(WIDTH - MARGIN + 4, MARGIN + 14 * (i + 1), name, anchor="start", size=10)
                    .replace("<text", f'<text fill="{color}"', 1))
    return _wrap(body, title)


def _shade(v: float, lo: float, hi: float) -> str:
    if not math.isfinite(v):
        return "#dddddd"
    f = 0.0 if hi == lo else (v - lo) / (hi - lo)
    # white -> dark blue
    r, g, b = (round(255 - f * (255 - c)) for c in (8, 48, 107))
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(values: Sequence[Sequence[float]], row_labels: Sequence[str], col_labels: Sequence[str],
            title: str) -> str:
    """Cell grid shaded by value; non-finite cells are grey and labelled ``---``."""
    nr, nc = len(row_labels), len(col_labels)
    flat = [v for row in values for v in row]
    lo, hi = _range(flat)
    cw = (WIDTH - 2 * MARGIN) / max(nc, 1)
    ch = (HEIGHT - 2 * MARGIN) / max(nr, 1)
    body = []
    for i in range(nr):
        y = MARGIN + i * ch
        body.append(_text(MARGIN - 6, y + ch / 2 + 4, row_labels[i], anchor="end", size=10))
        for j in range(nc):
            x = MARGIN + j * cw
            v = values[i][j]
            body.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cw)}" height="{_fmt(ch)}" '
                        f'fill="{_shade(v, lo, hi)}" stroke="white"/>')
            if nc * nr <= 200:
                label = f"{v:.3g}" if math.isfinite(v) else "---"
                body.append(_text(x + cw / 2, y + ch / 2 + 4, label, size=9))
    for j in range(nc):
        body.append(_text(MARGIN + j * cw + cw / 2, HEIGHT - MARGIN + 14, col_labels[j], size=10))
    return _wrap(body, title)


def write_svg(text: str, path: str | Path) -> None:
    Path(path).write_text(text)
