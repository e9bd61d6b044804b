"""Minimal hand-rolled SVG output: axes, scatter points, polylines.

CSV files are the canonical artifacts; these plots exist for quick visual
inspection without a plotting stack.  Output is deterministic text.
"""

from __future__ import annotations

import math

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 60, 20, 30, 45

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Frame:
    def __init__(self, xlim, ylim, logy=False):
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        self.logy = logy
        if logy:
            self.y0 = math.log10(self.y0)
            self.y1 = math.log10(self.y1)

    def px(self, x):
        t = (x - self.x0) / (self.x1 - self.x0 or 1.0)
        return _ML + t * (_W - _ML - _MR)

    def py(self, y):
        if self.logy:
            y = math.log10(max(y, 1e-300))
        t = (y - self.y0) / (self.y1 - self.y0 or 1.0)
        return _H - _MB - t * (_H - _MT - _MB)


def _header(title):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W // 2}" y="18" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">{title}</text>',
    ]


def _axes(fr, xlabel, ylabel):
    parts = [
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>',
        f'<text x="{_W // 2}" y="{_H - 10}" text-anchor="middle" '
        f'font-size="12" font-family="sans-serif">{xlabel}</text>',
        f'<text x="15" y="{_H // 2}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 15 {_H // 2})">{ylabel}</text>',
    ]
    for t in (0.0, 0.5, 1.0):
        xv = fr.x0 + t * (fr.x1 - fr.x0)
        yv = fr.y0 + t * (fr.y1 - fr.y0)
        ylab = f"1e{yv:.1f}" if fr.logy else f"{yv:.3g}"
        parts.append(
            f'<text x="{_fmt(fr.px(xv))}" y="{_H - _MB + 15}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">{xv:.3g}</text>'
        )
        py = _H - _MB - t * (_H - _MT - _MB)
        parts.append(
            f'<text x="{_ML - 5}" y="{_fmt(py + 3)}" text-anchor="end" '
            f'font-size="10" font-family="sans-serif">{ylab}</text>'
        )
    return parts


def line_plot(path, series, title="", xlabel="", ylabel="", logy=False) -> None:
    """Write a polyline plot; ``series`` maps label -> (xs, ys)."""
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys if not logy or y > 0]
    if not xs_all or not ys_all:
        raise ValueError("nothing to plot")
    fr = _Frame(
        (min(xs_all), max(xs_all) or 1.0),
        (min(ys_all), max(ys_all)),
        logy=logy,
    )
    parts = _header(title) + _axes(fr, xlabel, ylabel)
    for ci, (label, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[ci % len(_COLORS)]
        pts = " ".join(
            f"{_fmt(fr.px(x))},{_fmt(fr.py(y))}"
            for x, y in zip(xs, ys)
            if not logy or y > 0
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 5}" y="{_MT + 15 + 14 * ci}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def scatter_plot(
    path, xs, ys, title="", xlabel="", ylabel="", unit_circle=False
) -> None:
    """Write a scatter plot, optionally with the unit circle overlaid."""
    lo = min(min(xs, default=0.0), min(ys, default=0.0), -1.0 if unit_circle else 0.0)
    hi = max(max(xs, default=1.0), max(ys, default=1.0), 1.0 if unit_circle else 1.0)
    pad = 0.05 * (hi - lo or 1.0)
    fr = _Frame((lo - pad, hi + pad), (lo - pad, hi + pad))
    parts = _header(title) + _axes(fr, xlabel, ylabel)
    if unit_circle:
        pts = " ".join(
            f"{_fmt(fr.px(math.cos(a)))},{_fmt(fr.py(math.sin(a)))}"
            for a in [2 * math.pi * t / 256 for t in range(257)]
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#888"/>')
    for x, y in zip(xs, ys):
        parts.append(
            f'<circle cx="{_fmt(fr.px(x))}" cy="{_fmt(fr.py(y))}" r="2" '
            f'fill="#1f77b4" fill-opacity="0.7"/>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
