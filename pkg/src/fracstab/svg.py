"""Minimal deterministic SVG line-plot emitter.

Just enough for the experiment figures: multiple labeled series, linear or
log10 y-axis, dashed overlays, and a segment plot whose color encodes a
third coordinate (used for delay-versus-norm colored by time).  Output is
a plain string built with fixed number formatting, so identical inputs
produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import math

import numpy as np

PALETTE = ("#1f6fb4", "#d1495b", "#3a9b62", "#8056a0", "#c88a2d",
           "#4aa5a2", "#6b6b6b")

_W, _H = 760, 500
_ML, _MR, _MT, _MB = 72, 24, 42, 56


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: Optional[str] = None
    dashed: bool = False
    color: Optional[str] = None


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _nice_ticks(lo: float, hi: float, n: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo] if math.isfinite(lo) else [0.0]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    for m in (1.0, 2.0, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float):
    lo_d = math.floor(lo)
    hi_d = math.ceil(hi)
    decades = list(range(int(lo_d), int(hi_d) + 1))
    if len(decades) > 10:
        stride = math.ceil(len(decades) / 10)
        decades = decades[::stride]
    return [float(d) for d in decades]


def line_plot(series: Sequence[Series], *, title: str = "", xlabel: str = "",
              ylabel: str = "", logy: bool = False, path=None) -> str:
    """Render series to an SVG string; optionally write it to ``path``."""
    xs_all, ys_all = [], []
    prepared = []
    for s in series:
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        if logy:
            good = np.isfinite(x) & np.isfinite(y) & (y > 0.0)
            y = np.where(good, y, np.nan)
            y = np.log10(np.where(good, np.maximum(y, 1e-300), np.nan))
        good = np.isfinite(x) & np.isfinite(y)
        prepared.append((x, y, good, s))
        if good.any():
            xs_all.extend(x[good])
            ys_all.extend(y[good])
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = float(min(xs_all)), float(max(xs_all))
    y_lo, y_hi = float(min(ys_all)), float(max(ys_all))
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def px(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="Helvetica,Arial,sans-serif">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>']
    # grid and ticks
    yticks = _log_ticks(y_lo, y_hi) if logy else _nice_ticks(y_lo, y_hi)
    for t in yticks:
        if t < y_lo or t > y_hi:
            continue
        yy = py(t)
        out.append(f'<line x1="{_ML}" y1="{_fmt(yy)}" x2="{_W - _MR}" '
                   f'y2="{_fmt(yy)}" stroke="#e0e0e0" stroke-width="1"/>')
        lbl = f"1e{int(t)}" if logy else _fmt(t)
        out.append(f'<text x="{_ML - 6}" y="{_fmt(yy + 4)}" font-size="12" '
                   f'text-anchor="end">{lbl}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        if t < x_lo or t > x_hi:
            continue
        xx = px(t)
        out.append(f'<line x1="{_fmt(xx)}" y1="{_MT}" x2="{_fmt(xx)}" '
                   f'y2="{_H - _MB}" stroke="#efefef" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(xx)}" y="{_H - _MB + 18}" font-size="12" '
                   f'text-anchor="middle">{_fmt(t)}</text>')
    # axes
    out.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" '
               f'y2="{_H - _MB}" stroke="black" stroke-width="1.2"/>')
    out.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
               f'stroke="black" stroke-width="1.2"/>')
    # series
    legend = []
    for i, (x, y, good, s) in enumerate(prepared):
        color = s.color or PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="7,5"' if s.dashed else ""
        pts = []
        for xv, yv, ok in zip(x, y, good):
            if ok:
                pts.append(f"{_fmt(px(xv))},{_fmt(py(yv))}")
            elif pts:
                out.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                           f'stroke="{color}" stroke-width="1.6"{dash}/>')
                pts = []
        if pts:
            out.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                       f'stroke="{color}" stroke-width="1.6"{dash}/>')
        if s.label:
            legend.append((s.label, color, s.dashed))
    # legend
    ly = _MT + 8
    for label, color, dashed in legend:
        dash = ' stroke-dasharray="7,5"' if dashed else ""
        out.append(f'<line x1="{_W - _MR - 150}" y1="{ly}" x2="{_W - _MR - 120}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="2"{dash}/>')
        out.append(f'<text x="{_W - _MR - 114}" y="{ly + 4}" font-size="12">'
                   f'{label}</text>')
        ly += 18
    # labels
    if title:
        out.append(f'<text x="{_W / 2}" y="24" font-size="15" '
                   f'text-anchor="middle" font-weight="bold">{title}</text>')
    if xlabel:
        out.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 14}" '
                   f'font-size="13" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{(_MT + _H - _MB) / 2}" font-size="13" '
                   f'text-anchor="middle" transform="rotate(-90 18 '
                   f'{(_MT + _H - _MB) / 2})">{ylabel}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _ramp_color(f: float) -> str:
    # blue -> red ramp
    f = min(max(f, 0.0), 1.0)
    r = int(40 + 200 * f)
    g = int(80 + 40 * (1.0 - f))
    b = int(200 * (1.0 - f) + 40)
    return f"#{r:02x}{g:02x}{b:02x}"


def segmented_plot(x, y, c, *, title: str = "", xlabel: str = "",
                   ylabel: str = "", clabel: str = "", path=None) -> str:
    """Connected segments colored by a third coordinate (discrete ramp)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    good = np.isfinite(x) & np.isfinite(y)
    x, y, c = x[good], y[good], c[good]
    if x.size < 2:
        return line_plot([Series(x, y)], title=title, xlabel=xlabel,
                         ylabel=ylabel, path=path)
    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo, y_hi = float(y.min()), float(y.max())
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    c_lo, c_hi = float(c.min()), float(c.max())
    span = c_hi - c_lo if c_hi > c_lo else 1.0

    def px(v):
        return _ML + (v - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def py(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="Helvetica,Arial,sans-serif">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>']
    for t in _nice_ticks(y_lo, y_hi):
        yy = py(t)
        out.append(f'<line x1="{_ML}" y1="{_fmt(yy)}" x2="{_W - _MR}" '
                   f'y2="{_fmt(yy)}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{_ML - 6}" y="{_fmt(yy + 4)}" font-size="12" '
                   f'text-anchor="end">{_fmt(t)}</text>')
    for t in _nice_ticks(x_lo, x_hi):
        xx = px(t)
        out.append(f'<text x="{_fmt(xx)}" y="{_H - _MB + 18}" font-size="12" '
                   f'text-anchor="middle">{_fmt(t)}</text>')
    out.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" '
               f'y2="{_H - _MB}" stroke="black" stroke-width="1.2"/>')
    out.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
               f'stroke="black" stroke-width="1.2"/>')
    for i in range(x.size - 1):
        color = _ramp_color((0.5 * (c[i] + c[i + 1]) - c_lo) / span)
        out.append(f'<line x1="{_fmt(px(x[i]))}" y1="{_fmt(py(y[i]))}" '
                   f'x2="{_fmt(px(x[i + 1]))}" y2="{_fmt(py(y[i + 1]))}" '
                   f'stroke="{color}" stroke-width="1.8"/>')
    # color-ramp key
    for i in range(40):
        out.append(f'<rect x="{_W - _MR - 160 + 3 * i}" y="{_MT + 4}" width="3" '
                   f'height="10" fill="{_ramp_color(i / 39.0)}"/>')
    out.append(f'<text x="{_W - _MR - 160}" y="{_MT + 28}" font-size="11">'
               f'{clabel}: {_fmt(c_lo)} to {_fmt(c_hi)}</text>')
    if title:
        out.append(f'<text x="{_W / 2}" y="24" font-size="15" '
                   f'text-anchor="middle" font-weight="bold">{title}</text>')
    if xlabel:
        out.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 14}" '
                   f'font-size="13" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{(_MT + _H - _MB) / 2}" font-size="13" '
                   f'text-anchor="middle" transform="rotate(-90 18 '
                   f'{(_MT + _H - _MB) / 2})">{ylabel}</text>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
