"""Minimal SVG step plots (axes, step lines, legend) without a plotting library."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 150, 40, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def step_plot(curves: Mapping[str, tuple[Sequence[float], Sequence[float]]], title: str,
              xlabel: str, ylabel: str = "fraction of instances", log_x: bool = False) -> str:
    """Render right-continuous step curves ``name -> (x, y)`` with y in [0, 1]."""
    xs = [x for xv, _ in curves.values() for x in xv if math.isfinite(x)]
    if log_x:
        xs = [x for x in xs if x > 0.0]
    if not xs:
        xs = [1.0, 2.0] if log_x else [0.0, 1.0]
    tx = (lambda v: math.log10(v)) if log_x else (lambda v: v)
    x_lo, x_hi = tx(min(xs)), tx(max(xs))
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def px(v):
        return MARGIN_L + (tx(v) - x_lo) / (x_hi - x_lo) * pw

    def py(f):
        return MARGIN_T + (1.0 - f) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN_L + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for f in _ticks(0.0, 1.0):
        y = py(f)
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{_fmt(y)}" x2="{MARGIN_L}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_L - 8}" y="{_fmt(y + 4)}" text-anchor="end">{f:.2f}</text>')
    for t in _ticks(x_lo, x_hi):
        x = MARGIN_L + (t - x_lo) / (x_hi - x_lo) * pw
        label = f"{10 ** t:.3g}" if log_x else f"{t:.3g}"
        out.append(f'<line x1="{_fmt(x)}" y1="{MARGIN_T + ph}" x2="{_fmt(x)}" y2="{MARGIN_T + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{_fmt(x)}" y="{MARGIN_T + ph + 18}" text-anchor="middle">{label}</text>')
    out.append(f'<text x="{MARGIN_L + pw / 2:.2f}" y="{HEIGHT - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{MARGIN_T + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {MARGIN_T + ph / 2:.2f})">{escape(ylabel)}</text>')

    for i, (name, (xv, yv)) in enumerate(sorted(curves.items())):
        color = COLORS[i % len(COLORS)]
        pts = [(x, y) for x, y in zip(xv, yv) if math.isfinite(x) and (x > 0.0 or not log_x)]
        if pts:
            path = [f"M{_fmt(px(pts[0][0]))},{_fmt(py(pts[0][1]))}"]
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                path.append(f"H{_fmt(px(x1))}V{_fmt(py(y1))}")
            out.append(f'<path d="{" ".join(path)}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = MARGIN_T + 16 + 20 * i
        lx = WIDTH - MARGIN_R + 14
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
