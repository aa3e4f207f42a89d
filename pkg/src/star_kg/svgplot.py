"""Tiny SVG line plotter: one panel, linear or log y axis, polylines and a legend."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"]


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [float(v) for v in np.arange(start, hi + 0.5 * step, step)]


def _fmt(v):
    return f"{v:.3g}"


class Figure:
    """Accumulates series and renders them with :meth:`svg`.

    Parameters
    ----------
    logy : bool
        Plot ``log10`` of the y values; non-positive values are dropped.
    """

    def __init__(self, title="", xlabel="", ylabel="", logy=False, width=640, height=400):
        self.title, self.xlabel, self.ylabel = title, xlabel, ylabel
        self.logy = logy
        self.width, self.height = width, height
        self.series = []

    def line(self, x, y, label=""):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.logy:
            keep = y > 0
            x, y = x[keep], np.log10(y[keep])
        keep = np.isfinite(x) & np.isfinite(y)
        self.series.append((x[keep], y[keep], label))
        return self

    def _limits(self):
        xs = [s[0] for s in self.series if s[0].size]
        ys = [s[1] for s in self.series if s[1].size]
        if not xs:
            return 0.0, 1.0, 0.0, 1.0
        x0, x1 = min(v.min() for v in xs), max(v.max() for v in xs)
        y0, y1 = min(v.min() for v in ys), max(v.max() for v in ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def svg(self) -> str:
        W, H = self.width, self.height
        left, right, top, bottom = 70, 20, 35, 50
        x0, x1, y0, y1 = self._limits()
        pw, ph = W - left - right, H - top - bottom

        def px(v):
            return left + (v - x0) / (x1 - x0) * pw

        def py(v):
            return top + (y1 - v) / (y1 - y0) * ph

        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
               f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">',
               f'<rect width="{W}" height="{H}" fill="white"/>',
               f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
        for t in _ticks(x0, x1):
            if x0 <= t <= x1:
                out.append(f'<line x1="{px(t):.1f}" y1="{top + ph}" x2="{px(t):.1f}" '
                           f'y2="{top + ph + 4}" stroke="black"/>')
                out.append(f'<text x="{px(t):.1f}" y="{top + ph + 16}" text-anchor="middle">{_fmt(t)}</text>')
        for t in _ticks(y0, y1):
            if y0 <= t <= y1:
                lab = f"1e{_fmt(t)}" if self.logy else _fmt(t)
                out.append(f'<line x1="{left - 4}" y1="{py(t):.1f}" x2="{left}" y2="{py(t):.1f}" stroke="black"/>')
                out.append(f'<text x="{left - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{lab}</text>')
        out.append(f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="13">{escape(self.title)}</text>')
        out.append(f'<text x="{left + pw / 2}" y="{H - 10}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="15" y="{top + ph / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {top + ph / 2})">{escape(self.ylabel)}</text>')
        for i, (x, y, label) in enumerate(self.series):
            color = _COLORS[i % len(_COLORS)]
            if x.size:
                pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            if label:
                ly = top + 14 + 14 * i
                out.append(f'<line x1="{left + pw - 90}" y1="{ly - 4}" x2="{left + pw - 70}" y2="{ly - 4}" '
                           f'stroke="{color}" stroke-width="2"/>')
                out.append(f'<text x="{left + pw - 65}" y="{ly}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.svg())
