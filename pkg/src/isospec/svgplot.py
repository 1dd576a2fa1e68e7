"""Minimal self-contained SVG line plots.

Only what the command-line reports need: polylines over labeled axes with
ticks and a legend.  No external assets, no scripting, byte-identical
output for identical input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

PALETTE = ("#1f6fb4", "#c44e52", "#2e8b57", "#8a62b0", "#b8860b", "#4d4d4d")


@dataclass(frozen=True)
class Series:
    """One polyline; markers draws a small circle at every sample."""

    xs: tuple[float, ...]
    ys: tuple[float, ...]
    label: str
    color: str | None = None
    dashed: bool = False
    markers: bool = False

    def __post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValueError("series coordinates must pair up")
        if len(self.xs) < 2:
            raise ValueError("a series needs at least 2 points")


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    """Round tick positions on the 1-2-5 ladder covering [lo, hi]."""
    if not lo < hi:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1.0, 2.0, 5.0, 10.0)
                if (hi - lo) / (m * mag) <= target)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 0.5 * step:
        ticks.append(0.0 if abs(t) < 1e-9 * step else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_plot(series: list[Series], *, title: str, xlabel: str, ylabel: str,
              width: int = 720, height: int = 480) -> str:
    """Render the series to an SVG document string."""
    if not series:
        raise ValueError("nothing to plot")
    ml, mr, mt, mb = 64, 16, 40, 48
    pw, ph = width - ml - mr, height - mt - mb
    x_lo = min(min(s.xs) for s in series)
    x_hi = max(max(s.xs) for s in series)
    y_lo = min(min(s.ys) for s in series)
    y_hi = max(max(s.ys) for s in series)
    # degenerate spans still need a finite scale
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_x, pad_y = 0.04 * (x_hi - x_lo), 0.06 * (y_hi - y_lo)
    x_lo, x_hi = x_lo - pad_x, x_hi + pad_x
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    def sx(x: float) -> float:
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y: float) -> float:
        return mt + (y_hi - y) / (y_hi - y_lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
           f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
           f'font-family="sans-serif" font-size="15">{title}</text>']

    grid, labels = [], []
    for t in _nice_ticks(x_lo + pad_x, x_hi - pad_x):
        px = sx(t)
        grid.append(f'<line x1="{px:.2f}" y1="{mt}" x2="{px:.2f}" '
                    f'y2="{mt + ph}" stroke="#dddddd" stroke-width="1"/>')
        labels.append(f'<text x="{px:.2f}" y="{mt + ph + 18}" '
                      f'text-anchor="middle" font-family="sans-serif" '
                      f'font-size="11">{_fmt(t)}</text>')
    for t in _nice_ticks(y_lo + pad_y, y_hi - pad_y):
        py = sy(t)
        grid.append(f'<line x1="{ml}" y1="{py:.2f}" x2="{ml + pw}" '
                    f'y2="{py:.2f}" stroke="#dddddd" stroke-width="1"/>')
        labels.append(f'<text x="{ml - 6}" y="{py + 4:.2f}" '
                      f'text-anchor="end" font-family="sans-serif" '
                      f'font-size="11">{_fmt(t)}</text>')
    out.extend(grid)
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="#333333" stroke-width="1"/>')
    out.extend(labels)
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{ylabel}</text>')

    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}"
                       for x, y in zip(s.xs, s.ys))
        dash = ' stroke-dasharray="6 4"' if s.dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.6"{dash}/>')
        if s.markers:
            out.extend(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.6" '
                       f'fill="{color}"/>' for x, y in zip(s.xs, s.ys))
        ly = mt + 16 + 16 * i
        out.append(f'<line x1="{ml + pw - 150}" y1="{ly - 4}" '
                   f'x2="{ml + pw - 126}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="1.6"{dash}/>')
        out.append(f'<text x="{ml + pw - 120}" y="{ly}" '
                   f'font-family="sans-serif" font-size="11">{s.label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
