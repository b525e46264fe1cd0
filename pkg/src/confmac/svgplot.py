"""Minimal SVG line plot: axes, ticks, polylines and a legend."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 560, 480
MARGIN = 60
COLORS = ("#1f5fa8", "#c0392b", "#2e8b57", "#7d3c98")


def _ticks(hi: float, count: int = 5) -> list[float]:
    if hi <= 0:
        return [0.0]
    raw = hi / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    return [i * step for i in range(int(hi / step + 1e-9) + 1)]


def line_plot(series, xlabel: str = "R1", ylabel: str = "R2", title: str = "") -> str:
    """Render ``[(label, [(x, y), ...]), ...]`` on shared axes from the origin."""
    xs = [x for _, pts in series for x, _ in pts] or [1.0]
    ys = [y for _, pts in series for _, y in pts] or [1.0]
    xmax = max(max(xs), 1e-12) * 1.05
    ymax = max(max(ys), 1e-12) * 1.05
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x):
        return MARGIN + pw * x / xmax

    def sy(y):
        return HEIGHT - MARGIN - ph * y / ymax

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(xmax):
        out.append(f'<line x1="{sx(t):.2f}" y1="{HEIGHT - MARGIN}" x2="{sx(t):.2f}" '
                   f'y2="{HEIGHT - MARGIN + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{HEIGHT - MARGIN + 18}" '
                   f'text-anchor="middle">{t:g}</text>')
    for t in _ticks(ymax):
        out.append(f'<line x1="{MARGIN - 5}" y1="{sy(t):.2f}" x2="{MARGIN}" '
                   f'y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{HEIGHT / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {HEIGHT / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="30" text-anchor="middle" font-size="14">'
                   f'{escape(title)}</text>')
    for k, (label, pts) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        dash = ' stroke-dasharray="6 4"' if k % 2 else ""
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                   f'stroke-width="2"{dash}/>')
        ly = MARGIN + 10 + 18 * k
        lx = WIDTH - MARGIN - 130
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"{dash}/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
