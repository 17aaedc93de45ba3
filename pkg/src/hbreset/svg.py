"""Minimal deterministic SVG line charts.

Hand-rolled emission so figure bytes are a pure function of the data:
no plotting dependency, fixed coordinate formatting, no timestamps.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

Series = tuple[str, Sequence[float], Sequence[float]]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf")

WIDTH = 720
HEIGHT = 480
MARGIN_L = 64
MARGIN_R = 16
MARGIN_T = 36
MARGIN_B = 48


def _fmt(v: float) -> str:
    # fixed decimals keep output byte-stable across equal inputs
    return "%.3f" % v


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not (hi > lo):
        hi = lo + 1.0
    raw = (hi - lo) / max(target, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _decade_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    # cap label clutter on very tall ranges
    stride = max(1, (hi_e - lo_e) // 8)
    return [10.0 ** e for e in range(lo_e, hi_e + 1, stride)]


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_line_chart(series: Sequence[Series], title: str = "",
                      x_label: str = "", y_label: str = "",
                      log_y: bool = False,
                      y_floor: Optional[float] = None) -> str:
    """Render labelled (x, y) series to an SVG string.

    log_y plots y on a log10 axis; nonpositive values are clamped to
    y_floor (default: smallest positive value present, or 1e-16).
    """
    pts = []
    for _, xs, ys in series:
        if len(xs) != len(ys):
            raise ValueError("series x and y lengths differ")
        for x, y in zip(xs, ys):
            if math.isfinite(x) and math.isfinite(y):
                pts.append((float(x), float(y)))
    if not pts:
        pts = [(0.0, 1.0)]

    x_lo = min(p[0] for p in pts)
    x_hi = max(p[0] for p in pts)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0

    if log_y:
        positive = [p[1] for p in pts if p[1] > 0.0]
        floor = y_floor if y_floor is not None else (min(positive) if positive else 1e-16)
        floor = max(floor, 1e-300)
        y_vals = [max(p[1], floor) for p in pts]
        y_lo = min(y_vals)
        y_hi = max(y_vals)
        if y_hi <= y_lo:
            y_hi = y_lo * 10.0
        ly_lo, ly_hi = math.log10(y_lo), math.log10(y_hi)
        if ly_hi - ly_lo < 1e-9:
            ly_hi = ly_lo + 1.0

        def y_pix(y: float) -> float:
            ly = math.log10(max(y, floor))
            frac = (ly - ly_lo) / (ly_hi - ly_lo)
            return HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)

        y_ticks = [t for t in _decade_ticks(y_lo, y_hi) if y_lo / 1.001 <= t <= y_hi * 1.001]
    else:
        y_lo = min(p[1] for p in pts)
        y_hi = max(p[1] for p in pts)
        if y_hi <= y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
        pad = 0.05 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - pad, y_hi + pad

        def y_pix(y: float) -> float:
            frac = (y - y_lo) / (y_hi - y_lo)
            return HEIGHT - MARGIN_B - frac * (HEIGHT - MARGIN_T - MARGIN_B)

        y_ticks = _nice_ticks(y_lo, y_hi)

    def x_pix(x: float) -> float:
        frac = (x - x_lo) / (x_hi - x_lo)
        return MARGIN_L + frac * (WIDTH - MARGIN_L - MARGIN_R)

    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
               'viewBox="0 0 %d %d">' % (WIDTH, HEIGHT, WIDTH, HEIGHT))
    out.append('<rect width="%d" height="%d" fill="white"/>' % (WIDTH, HEIGHT))
    if title:
        out.append('<text x="%s" y="22" font-family="sans-serif" font-size="15" '
                   'text-anchor="middle">%s</text>' % (_fmt(WIDTH / 2), _escape(title)))

    # frame
    out.append('<rect x="%s" y="%s" width="%s" height="%s" fill="none" '
               'stroke="black" stroke-width="1"/>' % (
                   _fmt(MARGIN_L), _fmt(MARGIN_T),
                   _fmt(WIDTH - MARGIN_L - MARGIN_R),
                   _fmt(HEIGHT - MARGIN_T - MARGIN_B)))

    for t in _nice_ticks(x_lo, x_hi):
        if t < x_lo - 1e-12 or t > x_hi + 1e-12:
            continue
        px = x_pix(t)
        out.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="black"/>' % (
            _fmt(px), _fmt(HEIGHT - MARGIN_B), _fmt(px), _fmt(HEIGHT - MARGIN_B + 5)))
        out.append('<text x="%s" y="%s" font-family="sans-serif" font-size="11" '
                   'text-anchor="middle">%s</text>' % (
                       _fmt(px), _fmt(HEIGHT - MARGIN_B + 18), "%g" % t))
    for t in y_ticks:
        py = y_pix(t)
        out.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="black"/>' % (
            _fmt(MARGIN_L - 5), _fmt(py), _fmt(MARGIN_L), _fmt(py)))
        out.append('<text x="%s" y="%s" font-family="sans-serif" font-size="11" '
                   'text-anchor="end">%s</text>' % (
                       _fmt(MARGIN_L - 8), _fmt(py + 4), "%g" % t))

    if x_label:
        out.append('<text x="%s" y="%s" font-family="sans-serif" font-size="13" '
                   'text-anchor="middle">%s</text>' % (
                       _fmt((MARGIN_L + WIDTH - MARGIN_R) / 2),
                       _fmt(HEIGHT - 10), _escape(x_label)))
    if y_label:
        cy = (MARGIN_T + HEIGHT - MARGIN_B) / 2
        out.append('<text x="14" y="%s" font-family="sans-serif" font-size="13" '
                   'text-anchor="middle" transform="rotate(-90 14 %s)">%s</text>' % (
                       _fmt(cy), _fmt(cy), _escape(y_label)))

    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        coords = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if log_y and y <= 0.0:
                y = y_ticks[0] if y_ticks else 1e-16
            coords.append("%s,%s" % (_fmt(x_pix(x)), _fmt(y_pix(y))))
        if coords:
            out.append('<polyline points="%s" fill="none" stroke="%s" '
                       'stroke-width="1.5"/>' % (" ".join(coords), color))
        lx = WIDTH - MARGIN_R - 150
        ly = MARGIN_T + 16 + 16 * i
        out.append('<line x1="%s" y1="%s" x2="%s" y2="%s" stroke="%s" '
                   'stroke-width="1.5"/>' % (
                       _fmt(lx), _fmt(ly - 4), _fmt(lx + 22), _fmt(ly - 4), color))
        out.append('<text x="%s" y="%s" font-family="sans-serif" '
                   'font-size="12">%s</text>' % (_fmt(lx + 28), _fmt(ly), _escape(label)))

    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series: Sequence[Series], **kwargs) -> None:
    with open(path, "w") as fh:
        fh.write(render_line_chart(series, **kwargs))
