"""Minimal static SVG line plots (no plotting dependency).

Single-file SVG with optional log axes; enough for diameter-vs-eps and
error-vs-step curves.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50


def _transform(vals, log: bool):
    if log:
        return [math.log10(v) for v in vals]
    return list(vals)


def line_plot(path: str, xs: Sequence[float], ys: Sequence[float],
              title: str = "", xlabel: str = "", ylabel: str = "",
              log_x: bool = False, log_y: bool = False) -> None:
    pts = [(x, y) for x, y in zip(xs, ys)
           if (not log_x or x > 0) and (not log_y or y > 0)]
    if not pts:
        pts = [(1.0, 1.0)]
    tx = _transform([p[0] for p in pts], log_x)
    ty = _transform([p[1] for p in pts], log_y)
    x0, x1 = min(tx), max(tx)
    y0, y1 = min(ty), max(ty)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    px = lambda x: _ML + (x - x0) / (x1 - x0) * (_W - _ML - _MR)  # noqa: E731
    py = lambda y: _H - _MB - (y - y0) / (y1 - y0) * (_H - _MT - _MB)  # noqa: E731

    poly = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(tx, ty))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>',
        f'<polyline points="{poly}" fill="none" stroke="#1f77b4" '
        f'stroke-width="1.5"/>',
    ]
    for a, b in zip(tx, ty):
        parts.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" '
                     f'fill="#1f77b4"/>')
    for i in range(5):
        gx = x0 + (x1 - x0) * i / 4
        gy = y0 + (y1 - y0) * i / 4
        lx = f"1e{gx:.1f}" if log_x else f"{gx:.3g}"
        ly = f"1e{gy:.1f}" if log_y else f"{gy:.3g}"
        parts.append(f'<text x="{px(gx):.1f}" y="{_H - _MB + 16}" '
                     f'font-size="11" text-anchor="middle">{lx}</text>')
        parts.append(f'<text x="{_ML - 8}" y="{py(gy):.1f}" font-size="11" '
                     f'text-anchor="end" dominant-baseline="middle">{ly}</text>')
    if title:
        parts.append(f'<text x="{_W / 2}" y="18" font-size="13" '
                     f'text-anchor="middle">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{_W / 2}" y="{_H - 12}" font-size="12" '
                     f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{_H / 2}" font-size="12" '
                     f'text-anchor="middle" transform="rotate(-90 16 {_H / 2})">'
                     f'{ylabel}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
