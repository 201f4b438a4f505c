"""Minimal self-contained SVG line/scatter plots for CLI artifacts."""
from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

W, H = 640, 420
ML, MR, MT, MB = 70, 20, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


def plot(series: Sequence[tuple[str, Sequence[float], Sequence[float]]], title: str, xlabel: str,
         ylabel: str, scatter: bool = False) -> str:
    """Render series [(label, xs, ys), ...] to an SVG document string."""
    xs = [x for _, sx, _ in series for x in sx if math.isfinite(x)]
    ys = [y for _, _, sy in series for y in sy if math.isfinite(y)]
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return ML + (x - x0) / (x1 - x0) * (W - ML - MR)

    def py(y):
        return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<rect x="{ML}" y="{MT}" width="{W - ML - MR}" height="{H - MT - MB}" fill="none" stroke="black"/>']
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{H - MB}" x2="{px(t):.2f}" y2="{H - MB + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{H - MB + 18}" text-anchor="middle" font-size="11">{t:.4g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{ML - 5}" y1="{py(t):.2f}" x2="{ML}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ML - 8}" y="{py(t) + 4:.2f}" text-anchor="end" font-size="11">{t:.4g}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{H / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 15 {H / 2})">{escape(ylabel)}</text>')
    for i, (label, sx, sy) in enumerate(series):
        c = COLORS[i % len(COLORS)]
        pts = [(px(x), py(y)) for x, y in zip(sx, sy) if math.isfinite(x) and math.isfinite(y)]
        if scatter:
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{c}"/>' for a, b in pts)
        elif pts:
            d = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{c}" stroke-width="1.5"/>')
        out.append(f'<text x="{W - MR - 5}" y="{MT + 16 + 14 * i}" text-anchor="end" font-size="11" '
                   f'fill="{c}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
