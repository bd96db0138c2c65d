"""Bare-bones self-contained SVG line charts.

Each data series becomes exactly one ``<path>``; axes, ticks and the
legend use ``<line>``, ``<rect>`` and ``<text>`` only, so callers can
count series by counting paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 120, 36, 48
PALETTE = ("#1f5fbf", "#c8362b", "#2a8f3c", "#8a4fbf", "#d08a1c")


@dataclass
class Series:
    label: str
    x: object
    y: object


def _ticks(lo, hi, n=5):
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi == lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-9 * step:
        out.append(v)
        v += step
    return out


def _bounds(arrays):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays]) if arrays else np.array([])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def line_plot(path, title, xlabel, ylabel, series, markers=(), zero_line=False):
    """Write an SVG chart of ``series`` to ``path``; ``markers`` are (x, y) points."""
    x0, x1 = _bounds([s.x for s in series])
    y0, y1 = _bounds([s.y for s in series])
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return MARGIN_T + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + ph}" x2="{MARGIN_L + pw}" y2="{MARGIN_T + ph}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{MARGIN_T + ph}" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{MARGIN_T + ph}" x2="{X:.2f}" y2="{MARGIN_T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{MARGIN_T + ph + 16}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{Y:.2f}" x2="{MARGIN_L}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 6}" y="{Y + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.1f}" y="{HEIGHT - 10}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.1f})">{escape(ylabel)}</text>')
    if zero_line and y0 < 0 < y1:
        out.append(f'<line class="zero" x1="{MARGIN_L}" y1="{sy(0):.2f}" x2="{MARGIN_L + pw}" '
                   f'y2="{sy(0):.2f}" stroke="#999" stroke-dasharray="4 3"/>')

    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = [(sx(a), sy(b)) for a, b in zip(np.asarray(s.x, float), np.asarray(s.y, float))
               if math.isfinite(a) and math.isfinite(b)]
        d = " ".join(f"{'M' if j == 0 else 'L'}{px:.2f},{py:.2f}" for j, (px, py) in enumerate(pts))
        out.append(f'<path class="series" data-label="{escape(s.label)}" d="{d}" '
                   f'fill="none" stroke="{color}" stroke-width="1.4"/>')
        ly = MARGIN_T + 12 + 16 * i
        lx = WIDTH - MARGIN_R + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 18}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 24}" y="{ly + 4}">{escape(s.label)}</text>')

    for mx, my in markers:
        out.append(f'<circle class="event-marker" cx="{sx(mx):.2f}" cy="{sy(my):.2f}" r="4" '
                   f'fill="none" stroke="black" stroke-width="1.5"/>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
    return path
