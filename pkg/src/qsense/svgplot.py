"""Minimal deterministic SVG plots: axes, markers, error bars, paths, heatmaps.

Coordinates are printed with fixed precision so identical data always
produces identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
MARGIN = dict(left=70, right=20, top=40, bottom=55)
PALETTE = ["#5b2a86", "#2e8b57", "#d95f02", "#1f78b4", "#555555"]


def _f(x: float) -> str:
    return f"{x:.2f}"


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    yerr: Optional[Sequence[float]] = None
    label: str = ""
    kind: str = "points"  # "points" or "line"
    color: str = ""
    dash: str = ""


@dataclass
class Axes:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    series: list = field(default_factory=list)

    def add(self, s: Series) -> Axes:
        if not s.color:
            s.color = PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(s)
        return self


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    return [10.0**e for e in range(math.floor(lo), math.ceil(hi) + 1) if lo - 1e-9 <= e <= hi + 1e-9]


def render(ax: Axes) -> str:
    tx = (lambda v: math.log10(v)) if ax.logx else float
    ty = (lambda v: math.log10(v)) if ax.logy else float
    xs, ys = [], []
    for s in ax.series:
        for i, (x, y) in enumerate(zip(s.x, s.y)):
            if (ax.logx and x <= 0) or (ax.logy and y <= 0):
                continue
            xs.append(tx(x))
            e = s.yerr[i] if s.yerr is not None else 0.0
            ys.append(ty(y))
            if e:
                if not ax.logy or y - e > 0:
                    ys.append(ty(y - e))
                ys.append(ty(y + e))
    x0, x1 = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y0, y1 = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pad_x, pad_y = 0.04 * (x1 - x0), 0.06 * (y1 - y0)
    x0, x1, y0, y1 = x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y
    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]

    def px(v):
        return L + (v - x0) / (x1 - x0) * (R - L)

    def py(v):
        return B - (v - y0) / (y1 - y0) * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(ax.title)}</text>',
        f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>',
    ]
    xt = _log_ticks(x0, x1) if ax.logx else _nice_ticks(x0, x1)
    yt = _log_ticks(y0, y1) if ax.logy else _nice_ticks(y0, y1)
    for t in xt:
        v = math.log10(t) if ax.logx else t
        out.append(f'<line x1="{_f(px(v))}" y1="{B}" x2="{_f(px(v))}" y2="{B + 5}" stroke="black"/>')
        out.append(f'<text x="{_f(px(v))}" y="{B + 18}" text-anchor="middle">{t:g}</text>')
    for t in yt:
        v = math.log10(t) if ax.logy else t
        out.append(f'<line x1="{L - 5}" y1="{_f(py(v))}" x2="{L}" y2="{_f(py(v))}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{_f(py(v) + 4)}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(ax.xlabel)}</text>')
    out.append(f'<text x="18" y="{(T + B) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(T + B) / 2})">{escape(ax.ylabel)}</text>')

    for k, s in enumerate(ax.series):
        pts = [(tx(x), ty(y), (s.yerr[i] if s.yerr is not None else 0.0), y)
               for i, (x, y) in enumerate(zip(s.x, s.y))
               if not ((ax.logx and x <= 0) or (ax.logy and y <= 0))]
        dash = f' stroke-dasharray="{s.dash}"' if s.dash else ""
        if s.kind == "line":
            d = " ".join(f"{'M' if i == 0 else 'L'}{_f(px(a))},{_f(py(b))}" for i, (a, b, _, _) in enumerate(pts))
            out.append(f'<path d="{d}" fill="none" stroke="{s.color}" stroke-width="1.6"{dash}/>')
        else:
            for a, b, e, yraw in pts:
                if e:
                    lo = ty(yraw - e) if (not ax.logy or yraw - e > 0) else y0
                    hi = ty(yraw + e)
                    out.append(f'<line x1="{_f(px(a))}" y1="{_f(py(lo))}" x2="{_f(px(a))}" y2="{_f(py(hi))}" '
                               f'stroke="{s.color}"/>')
                out.append(f'<circle cx="{_f(px(a))}" cy="{_f(py(b))}" r="3.5" fill="{s.color}"/>')
        if s.label:
            ly = T + 16 + 16 * k
            out.append(f'<line x1="{R - 150}" y1="{ly - 4}" x2="{R - 130}" y2="{ly - 4}" stroke="{s.color}" '
                       f'stroke-width="2"{dash}/>')
            out.append(f'<text x="{R - 125}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def histogram(values: Sequence[float], bins: int = 15, title: str = "", xlabel: str = "",
              markers: Sequence[tuple[float, str]] = ()) -> str:
    """Bar histogram with optional labelled vertical reference lines."""
    vals = list(values)
    lo, hi = min(vals), max(vals)
    for m, _ in markers:
        lo, hi = min(lo, m), max(hi, m)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    width = (hi - lo) / bins
    counts = [0] * bins
    for v in vals:
        counts[min(int((v - lo) / width), bins - 1)] += 1
    L, R, T, B = MARGIN["left"], WIDTH - MARGIN["right"], MARGIN["top"], HEIGHT - MARGIN["bottom"]
    top = max(counts) * 1.1 or 1

    def px(v):
        return L + (v - lo) / (hi - lo) * (R - L)

    def py(c):
        return B - c / top * (B - T)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{L}" y="{T}" width="{R - L}" height="{B - T}" fill="none" stroke="black"/>',
    ]
    for i, c in enumerate(counts):
        a, b = px(lo + i * width), px(lo + (i + 1) * width)
        out.append(f'<rect x="{_f(a)}" y="{_f(py(c))}" width="{_f(b - a)}" height="{_f(B - py(c))}" '
                   f'fill="{PALETTE[0]}" fill-opacity="0.7" stroke="white"/>')
    for t in _nice_ticks(lo, hi):
        out.append(f'<text x="{_f(px(t))}" y="{B + 18}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(0, top, 4):
        out.append(f'<text x="{L - 8}" y="{_f(py(t) + 4)}" text-anchor="end">{t:g}</text>')
    for k, (m, label) in enumerate(markers):
        out.append(f'<line x1="{_f(px(m))}" y1="{T}" x2="{_f(px(m))}" y2="{B}" stroke="{PALETTE[2 + k % 3]}" '
                   f'stroke-dasharray="5,4"/>')
        out.append(f'<text x="{_f(px(m) + 4)}" y="{T + 14 + 14 * k}">{escape(label)}</text>')
    out.append(f'<text x="{(L + R) / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _diverging(v: float, vmax: float) -> str:
    """Blue (negative) - white (zero) - red (positive)."""
    t = max(-1.0, min(1.0, v / vmax)) if vmax > 0 else 0.0
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap(theta: Sequence[float], phi: Sequence[float], values: Sequence[Sequence[float]], title: str = "") -> str:
    """Equirectangular map, azimuth across and polar angle down, colour centred on zero."""
    nt, nphi = len(theta), len(phi)
    vmax = max(abs(v) for row in values for v in row)
    L, T = MARGIN["left"], MARGIN["top"]
    W, H = WIDTH - L - 90, HEIGHT - T - MARGIN["bottom"]
    cw, ch = W / nphi, H / nt
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12" shape-rendering="crispEdges">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for i in range(nt):
        for j in range(nphi):
            out.append(f'<rect x="{_f(L + j * cw)}" y="{_f(T + i * ch)}" width="{_f(cw + 0.05)}" '
                       f'height="{_f(ch + 0.05)}" fill="{_diverging(values[i][j], vmax)}"/>')
    out.append(f'<rect x="{L}" y="{T}" width="{_f(W)}" height="{_f(H)}" fill="none" stroke="black"/>')
    for frac, lab in ((0, "0"), (0.5, "pi"), (1, "2pi")):
        out.append(f'<text x="{_f(L + frac * W)}" y="{_f(T + H + 18)}" text-anchor="middle">{lab}</text>')
    for frac, lab in ((0, "0"), (0.5, "pi/2"), (1, "pi")):
        out.append(f'<text x="{L - 8}" y="{_f(T + frac * H + 4)}" text-anchor="end">{lab}</text>')
    out.append(f'<text x="{_f(L + W / 2)}" y="{HEIGHT - 15}" text-anchor="middle">azimuth</text>')
    out.append(f'<text x="18" y="{_f(T + H / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_f(T + H / 2)})">polar angle theta</text>')
    bx = L + W + 25
    for k in range(41):
        v = vmax * (1 - k / 20)
        out.append(f'<rect x="{bx}" y="{_f(T + k * H / 41)}" width="18" height="{_f(H / 41 + 0.05)}" '
                   f'fill="{_diverging(v, vmax)}"/>')
    out.append(f'<text x="{bx + 22}" y="{T + 8}">{vmax:.3g}</text>')
    out.append(f'<text x="{bx + 22}" y="{_f(T + H / 2 + 4)}">0</text>')
    out.append(f'<text x="{bx + 22}" y="{_f(T + H)}">{-vmax:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
