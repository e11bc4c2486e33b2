"""A small self-contained SVG writer: axes, optional log scales, polylines, legend."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

_W, _H = 640, 480
_M = 60
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _ticks(lo: float, hi: float, log: bool):
    if log:
        a, b = math.floor(lo), math.ceil(hi)
        return [(float(k), f"1e{k}") for k in range(a, b + 1) if lo - 1e-9 <= k <= hi + 1e-9]
    span = hi - lo or 1.0
    step = 10 ** math.floor(math.log10(span / 5))
    for m in (1, 2, 5, 10):
        if span / (step * m) <= 6:
            step *= m
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * span:
        out.append((v, f"{v:.3g}"))
        v += step
    return out


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def plot(series, path, title: str = "", xlabel: str = "", ylabel: str = "",
         logx: bool = False, logy: bool = False, markers: bool = True,
         equal_aspect: bool = False) -> None:
    """``series`` is a list of (label, xs, ys); nonpositive data are dropped on log axes."""
    prepared = []
    for label, xs, ys in series:
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if logx:
            keep &= x > 0
        if logy:
            keep &= y > 0
        x, y = x[keep], y[keep]
        if logx:
            x = np.log10(x)
        if logy:
            y = np.log10(y)
        prepared.append((label, x, y))
    allx = np.concatenate([p[1] for p in prepared]) if prepared else np.zeros(0)
    ally = np.concatenate([p[2] for p in prepared]) if prepared else np.zeros(0)
    if allx.size == 0:
        allx = ally = np.array([0.0, 1.0])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = _W - 2 * _M, _H - 2 * _M
    if equal_aspect:
        s = max((x1 - x0) / pw, (y1 - y0) / ph)
        cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
        x0, x1 = cx - 0.5 * s * pw, cx + 0.5 * s * pw
        y0, y1 = cy - 0.5 * s * ph, cy + 0.5 * s * ph

    def X(v):
        return _M + (v - x0) / (x1 - x0) * pw

    def Y(v):
        return _H - _M - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
           f'<rect width="{_W}" height="{_H}" fill="white"/>',
           f'<rect x="{_M}" y="{_M}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v, lab in _ticks(x0, x1, logx):
        out.append(f'<line x1="{_fmt(X(v))}" y1="{_H - _M}" x2="{_fmt(X(v))}" y2="{_H - _M + 5}" '
                   'stroke="black"/>')
        out.append(f'<text x="{_fmt(X(v))}" y="{_H - _M + 18}" text-anchor="middle">{lab}</text>')
    for v, lab in _ticks(y0, y1, logy):
        out.append(f'<line x1="{_M - 5}" y1="{_fmt(Y(v))}" x2="{_M}" y2="{_fmt(Y(v))}" '
                   'stroke="black"/>')
        out.append(f'<text x="{_M - 8}" y="{_fmt(Y(v) + 4)}" text-anchor="end">{lab}</text>')
    if title:
        out.append(f'<text x="{_W / 2}" y="{_M / 2}" text-anchor="middle" font-size="14">'
                   f'{_escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle">{_escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="15" y="{_H / 2}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {_H / 2})">{_escape(ylabel)}</text>')
    for k, (label, x, y) in enumerate(prepared):
        col = _COLORS[k % len(_COLORS)]
        if x.size:
            pts = " ".join(f"{_fmt(X(a))},{_fmt(Y(b))}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="1.5"/>')
            if markers and x.size <= 50:
                for a, b in zip(x, y):
                    out.append(f'<circle cx="{_fmt(X(a))}" cy="{_fmt(Y(b))}" r="3" fill="{col}"/>')
        ly = _M + 15 + 16 * k
        out.append(f'<line x1="{_W - _M - 150}" y1="{ly}" x2="{_W - _M - 130}" y2="{ly}" '
                   f'stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _M - 125}" y="{ly + 4}">{_escape(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def curve_overlay(curves, path, title: str = "") -> None:
    """``curves`` is a list of (label, complex points)."""
    series = [(lab, np.real(z), np.imag(z)) for lab, z in curves]
    plot(series, path, title, "Re", "Im", markers=False, equal_aspect=True)
