"""Small self-contained SVG charts (no plotting library required).

Three chart kinds cover the reports: ``line-with-band`` (ranking stability
with a +/-1 std band), ``bar-with-interval`` (bootstrap CIs) and ``heatmap``
(windowed correlation grids). Output is deterministic for identical input.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .errors import InputError

CHART_KINDS = ("line-with-band", "bar-with-interval", "heatmap")
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")

WIDTH, HEIGHT = 640, 420
MARGIN = {"left": 70, "right": 20, "top": 40, "bottom": 60}


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


class _Canvas:
    def __init__(self, width: int = WIDTH, height: int = HEIGHT):
        self.width, self.height = width, height
        self.parts: list[str] = []

    def add(self, tag: str, text: str | None = None, **attrs) -> None:
        attr = "".join(
            f" {k.rstrip('_').replace('_', '-')}={quoteattr(_fmt(v) if isinstance(v, float) else str(v))}"
            for k, v in attrs.items()
        )
        if text is None:
            self.parts.append(f"<{tag}{attr}/>")
        else:
            self.parts.append(f"<{tag}{attr}>{escape(text)}</{tag}>")

    def text(self, x, y, s, anchor="middle", size=12, **attrs) -> None:
        self.add("text", s, x=float(x), y=float(y), text_anchor=anchor, font_size=size, **attrs)

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}" font-family="sans-serif">\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


class _Axes:
    """Linear (or log10 on x) mapping from data to the plot area."""

    def __init__(self, canvas, xlim, ylim, log_x=False):
        self.c = canvas
        self.log_x = log_x
        self.x0, self.x1 = MARGIN["left"], canvas.width - MARGIN["right"]
        self.y0, self.y1 = canvas.height - MARGIN["bottom"], MARGIN["top"]
        self.xlim = tuple(math.log10(v) for v in xlim) if log_x else xlim
        self.ylim = ylim

    def px(self, x: float) -> float:
        lo, hi = self.xlim
        v = math.log10(x) if self.log_x else x
        return self.x0 + (v - lo) / ((hi - lo) or 1.0) * (self.x1 - self.x0)

    def py(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y0 - (y - lo) / ((hi - lo) or 1.0) * (self.y0 - self.y1)

    def frame(self, xlabel: str, ylabel: str, title: str, xticks=None) -> None:
        c = self.c
        c.add("rect", x=self.x0, y=self.y1, width=self.x1 - self.x0, height=self.y0 - self.y1,
              fill="none", stroke="#333")
        for t in _nice_ticks(*self.ylim):
            y = self.py(t)
            c.add("line", x1=self.x0 - 4, y1=float(y), x2=self.x0, y2=float(y), stroke="#333")
            c.text(self.x0 - 8, y + 4, _fmt(t), anchor="end", size=11)
        if xticks is not None:
            for t in xticks:
                x = self.px(t)
                c.add("line", x1=float(x), y1=self.y0, x2=float(x), y2=self.y0 + 4, stroke="#333")
                c.text(x, self.y0 + 18, f"{t:g}", size=11)
        c.text((self.x0 + self.x1) / 2, c.height - 18, xlabel, size=13)
        ymid = (self.y0 + self.y1) / 2
        c.text(18, ymid, ylabel, size=13, transform=f"rotate(-90 18 {_fmt(ymid)})")
        c.text(c.width / 2, 24, title, size=15)


def _line_with_band(data: dict) -> str:
    series = data.get("series") or []
    if not series or not any(len(s.get("x", [])) for s in series):
        raise InputError("line chart needs at least one point")
    xs = [x for s in series for x in s["x"]]
    lows = [y - b for s in series for y, b in zip(s["y"], s.get("band") or [0] * len(s["y"]))]
    highs = [y + b for s in series for y, b in zip(s["y"], s.get("band") or [0] * len(s["y"]))]
    log_x = bool(data.get("log_x")) and min(xs) > 0
    xlim = (min(xs), max(xs))
    if xlim[1] == xlim[0]:
        xlim = (xlim[0] / 2, xlim[0] * 2) if log_x else (xlim[0] - 1, xlim[0] + 1)
    ylim = data.get("ylim") or (min(lows), max(highs))
    if ylim[1] <= ylim[0]:
        ylim = (ylim[0] - 0.5, ylim[1] + 0.5)
    c = _Canvas()
    ax = _Axes(c, xlim, ylim, log_x)
    ax.frame(data.get("xlabel", "x"), data.get("ylabel", "y"), data.get("title", ""), xticks=sorted(set(xs)))
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = list(zip(s["x"], s["y"], s.get("band") or [0.0] * len(s["y"])))
        if s.get("band"):
            upper = [f"{_fmt(ax.px(x))},{_fmt(ax.py(y + b))}" for x, y, b in pts]
            lower = [f"{_fmt(ax.px(x))},{_fmt(ax.py(y - b))}" for x, y, b in reversed(pts)]
            c.add("polygon", points=" ".join(upper + lower), fill=color, fill_opacity="0.2", stroke="none")
        path = " ".join(f"{_fmt(ax.px(x))},{_fmt(ax.py(y))}" for x, y, _ in pts)
        c.add("polyline", points=path, fill="none", stroke=color, stroke_width=2)
        for x, y, _ in pts:
            c.add("circle", cx=float(ax.px(x)), cy=float(ax.py(y)), r=3, fill=color)
        c.text(ax.x1 - 8, MARGIN["top"] + 16 + 16 * k, s.get("label", f"series {k}"), anchor="end",
               size=12, fill=color)
    return c.render()


def _bar_with_interval(data: dict) -> str:
    bars = data.get("bars") or []
    if not bars:
        raise InputError("bar chart needs at least one bar")
    lo = min(min(b["lower"], b["value"]) for b in bars)
    hi = max(max(b["upper"], b["value"]) for b in bars)
    ylim = data.get("ylim") or (min(lo, 0.0), max(hi, 0.0))
    if ylim[1] <= ylim[0]:
        ylim = (ylim[0] - 0.5, ylim[1] + 0.5)
    c = _Canvas(max(WIDTH, MARGIN["left"] + MARGIN["right"] + 44 * len(bars)))
    ax = _Axes(c, (0.0, float(len(bars))), ylim)
    ax.frame(data.get("xlabel", ""), data.get("ylabel", "value"), data.get("title", ""))
    zero = ax.py(min(max(0.0, ylim[0]), ylim[1]))
    slot = (ax.x1 - ax.x0) / len(bars)
    for k, b in enumerate(bars):
        color = b.get("color") or PALETTE[k % len(PALETTE)]
        left = ax.x0 + slot * (k + 0.2)
        top = ax.py(b["value"])
        c.add("rect", x=float(left), y=float(min(top, zero)), width=float(slot * 0.6),
              height=float(abs(zero - top)), fill=color, fill_opacity="0.7")
        mid = left + slot * 0.3
        ylo, yhi = ax.py(b["lower"]), ax.py(b["upper"])
        c.add("line", x1=float(mid), y1=float(ylo), x2=float(mid), y2=float(yhi), stroke="#000", stroke_width=2)
        for yy in (ylo, yhi):
            c.add("line", x1=float(mid - 8), y1=float(yy), x2=float(mid + 8), y2=float(yy), stroke="#000",
                  stroke_width=2)
        c.text(mid, ax.y0 + 18, b.get("label", str(k)), size=11)
        c.text(mid, yhi - 6, f"[{b['lower']:.2f}, {b['upper']:.2f}]", size=10)
    return c.render()


def _color(value: float | None, vmin: float, vmax: float) -> str:
    if value is None:
        return "#dddddd"
    t = (min(max(value, vmin), vmax) - vmin) / ((vmax - vmin) or 1.0)
    # blue (low) -> white -> red (high)
    if t < 0.5:
        s = t / 0.5
        rgb = (int(59 + s * 196), int(76 + s * 179), int(192 + s * 63))
    else:
        s = (t - 0.5) / 0.5
        rgb = (int(255 - s * 75), int(255 - s * 251), int(255 - s * 217))
    return "#%02x%02x%02x" % rgb


def _heatmap(data: dict) -> str:
    rows, cols, cells = data.get("rows") or [], data.get("cols") or [], data.get("cells") or []
    if not rows or not cols or not cells:
        raise InputError("heatmap needs rows, columns and cells")
    vmin, vmax = data.get("vmin", -1.0), data.get("vmax", 1.0)
    c = _Canvas(max(WIDTH, 90 + 56 * len(cols)), max(HEIGHT, 110 + 40 * len(rows)))
    x0, y0 = MARGIN["left"] + 10, MARGIN["top"] + 20
    cw = (c.width - x0 - MARGIN["right"]) / len(cols)
    ch = (c.height - y0 - MARGIN["bottom"]) / len(rows)
    c.text(c.width / 2, 24, data.get("title", ""), size=15)
    for j, label in enumerate(cols):
        c.text(x0 + cw * (j + 0.5), y0 - 6, str(label), size=11)
    for i, label in enumerate(rows):
        c.text(x0 - 6, y0 + ch * (i + 0.5) + 4, str(label), anchor="end", size=11)
    for cell in cells:
        i, j = rows.index(cell["row"]), cols.index(cell["col"])
        x, y = x0 + cw * j, y0 + ch * i
        value = cell.get("value")
        c.add("rect", x=float(x), y=float(y), width=float(cw), height=float(ch),
              fill=_color(value, vmin, vmax), stroke="#ffffff", class_="cell")
        c.text(x + cw / 2, y + ch / 2, "n/a" if value is None else f"{value:.2f}", size=11)
        if cell.get("note"):
            c.text(x + cw / 2, y + ch / 2 + 13, str(cell["note"]), size=8, fill="#444", class_="note")
    c.text(x0 + cw * len(cols) / 2, c.height - 30, data.get("xlabel", ""), size=13)
    ymid = y0 + ch * len(rows) / 2
    c.text(16, ymid, data.get("ylabel", ""), size=13, transform=f"rotate(-90 16 {_fmt(ymid)})")
    return c.render()


def render_svg_chart(data: dict, chart_kind: str) -> str:
    """Render ``data`` as an SVG 1.1 document.

    ``line-with-band``: ``{"series": [{"label", "x", "y", "band"}], "log_x", ...}``
    ``bar-with-interval``: ``{"bars": [{"label", "value", "lower", "upper"}], ...}``
    ``heatmap``: ``{"rows", "cols", "cells": [{"row", "col", "value", "note"}], ...}``

    All kinds accept ``title``, ``xlabel`` and ``ylabel``.
    """
    if chart_kind == "line-with-band":
        return _line_with_band(data)
    if chart_kind == "bar-with-interval":
        return _bar_with_interval(data)
    if chart_kind == "heatmap":
        return _heatmap(data)
    raise InputError(f"unknown chart kind {chart_kind!r}; expected one of {CHART_KINDS}")
