"""Minimal deterministic SVG line-plot emitter for batch outputs."""
from __future__ import annotations

import numpy as np

_W, _H = 640, 200
_ML, _MR, _MT, _MB = 60, 10, 20, 30
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _panel(title, t, series, labels, y0):
    lines = [f'<text x="{_ML}" y="{y0 + 14}" font-size="12" '
             f'font-family="sans-serif">{title}</text>']
    ys = np.concatenate(series)
    lo, hi = float(ys.min()), float(ys.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    x_of = lambda x: _ML + (x - t[0]) / (t[-1] - t[0]) * (_W - _ML - _MR)
    y_of = lambda y: y0 + _MT + (hi - y) / (hi - lo) * (_H - _MT - _MB)
    lines.append(f'<rect x="{_ML}" y="{y0 + _MT}" width="{_W - _ML - _MR}" '
                 f'height="{_H - _MT - _MB}" fill="none" stroke="#999"/>')
    for v in (lo + pad, hi - pad):
        lines.append(f'<text x="{_ML - 5}" y="{y_of(v):.1f}" font-size="10" '
                     f'text-anchor="end" font-family="sans-serif">{v:.4g}</text>')
    for k, (y, lab) in enumerate(zip(series, labels)):
        step = max(len(t) // 2000, 1)
        pts = " ".join(f"{x_of(t[i]):.2f},{y_of(y[i]):.2f}"
                       for i in range(0, len(t), step))
        color = _COLORS[k % len(_COLORS)]
        lines.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1"/>')
        lines.append(f'<text x="{_W - _MR - 90}" y="{y0 + 14 + 12 * k}" '
                     f'font-size="10" fill="{color}" '
                     f'font-family="sans-serif">{lab}</text>')
    return lines


def trace_svg(trace, panels=None) -> str:
    """Stacked line panels for a SimTrace; deterministic output text."""
    if panels is None:
        panels = [("Grid / GSC frequency (Hz)", ("f_g", "f_gsc")),
                  ("DC-link voltage (pu)", ("v_dc",)),
                  ("Rotor speed (pu) / pitch (deg)", ("omega_r", "beta")),
                  ("Power (pu)", ("P_wt", "P_gsc", "P_g"))]
    body = []
    for i, (title, cols) in enumerate(panels):
        series = [trace.column(c) for c in cols]
        body += _panel(title, trace.t, series, cols, i * _H)
    h = len(panels) * _H
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
            f'height="{h}">\n' + "\n".join(body) + "\n</svg>\n")


def heatmap_svg(v_grid, eta_grid, values, title="droop map") -> str:
    """Grid heat map; infinite cells rendered grey."""
    values = np.asarray(values, dtype=float)
    finite = values[np.isfinite(values)]
    lo = float(finite.min()) if finite.size else 0.0
    hi = float(finite.max()) if finite.size else 1.0
    cw, ch = 40, 24
    x0, y0 = 80, 40
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" '
           f'width="{x0 + cw * len(eta_grid) + 20}" '
           f'height="{y0 + ch * len(v_grid) + 20}">',
           f'<text x="{x0}" y="20" font-size="12" '
           f'font-family="sans-serif">{title}</text>']
    for i, v in enumerate(v_grid):
        out.append(f'<text x="{x0 - 6}" y="{y0 + ch * i + 16}" font-size="10" '
                   f'text-anchor="end" font-family="sans-serif">{v:g}</text>')
        for j, e in enumerate(eta_grid):
            val = values[i, j]
            if not np.isfinite(val):
                fill = "#cccccc"
            else:
                z = 0.0 if hi == lo else (val - lo) / (hi - lo)
                r = int(255 * z)
                b = int(255 * (1 - z))
                fill = f"#{r:02x}40{b:02x}"
            out.append(f'<rect x="{x0 + cw * j}" y="{y0 + ch * i}" '
                       f'width="{cw}" height="{ch}" fill="{fill}" '
                       f'stroke="#fff"/>')
    for j, e in enumerate(eta_grid):
        out.append(f'<text x="{x0 + cw * j + 4}" y="{y0 - 6}" font-size="10" '
                   f'font-family="sans-serif">{e:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
