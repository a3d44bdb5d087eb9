"""Minimal SVG line plots, written as plain XML text.

Output is a pure function of the inputs (fixed number formatting, no
timestamps), so files can be compared byte for byte.
"""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _polyline(y: np.ndarray, x0: float, y0: float, w: float, h: float, lo: float, hi: float) -> str:
    n = len(y)
    xs = x0 + (np.arange(n) / max(n - 1, 1)) * w
    span = hi - lo if hi > lo else 1.0
    ys = y0 + h - (y - lo) / span * h
    return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(xs, ys))


def line_plot(traces, title: str = "", width: int = 720, panel_height: int = 110,
              stacked: bool = True, xlabel: str = "") -> str:
    """Render ``traces`` (a list of ``(label, values)``) to an SVG document.

    With ``stacked=True`` every trace gets its own panel and y-range; otherwise
    all traces share one panel and a legend.
    """
    traces = [(str(lab), np.asarray(y, dtype=np.float64).ravel()) for lab, y in traces]
    if not traces:
        raise ValueError("nothing to plot")
    ml, mr, mt, mb = 60, 20, 34, 30
    inner_w = width - ml - mr
    n_panels = len(traces) if stacked else 1
    height = mt + mb + n_panels * panel_height
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{escape(title)}</text>',
    ]
    if stacked:
        panels = [[(i, lab, y)] for i, (lab, y) in enumerate(traces)]
    else:
        panels = [[(i, lab, y) for i, (lab, y) in enumerate(traces)]]
    gap = 8
    for k, panel in enumerate(panels):
        py = mt + k * panel_height
        ph = panel_height - gap
        lo = min(float(np.min(y)) for _, _, y in panel)
        hi = max(float(np.max(y)) for _, _, y in panel)
        out.append(f'<g class="panel" id="panel-{k + 1}">')
        out.append(f'<rect x="{ml}" y="{py}" width="{inner_w}" height="{ph}" fill="none" '
                   f'stroke="#888" stroke-width="0.5"/>')
        if lo < 0 < hi:
            zy = py + ph - (0 - lo) / (hi - lo) * ph
            out.append(f'<line x1="{ml}" y1="{_fmt(zy)}" x2="{ml + inner_w}" y2="{_fmt(zy)}" '
                       f'stroke="#ccc" stroke-width="0.5"/>')
        out.append(f'<text x="{ml - 4}" y="{py + 10}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="9">{hi:.3g}</text>')
        out.append(f'<text x="{ml - 4}" y="{py + ph}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="9">{lo:.3g}</text>')
        for j, (i, lab, y) in enumerate(panel):
            color = PALETTE[i % len(PALETTE)]
            out.append(f'<g class="trace" id="trace-{i + 1}">')
            out.append(f"<title>{escape(lab)}</title>")
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" '
                       f'points="{_polyline(y, ml, py, inner_w, ph, lo, hi)}"/>')
            ly = py + 12 + 12 * j
            out.append(f'<text class="label" x="{ml + inner_w - 4}" y="{ly}" text-anchor="end" '
                       f'font-family="sans-serif" font-size="10" fill="{color}">{escape(lab)}</text>')
            out.append("</g>")
        out.append("</g>")
    if xlabel:
        out.append(f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{escape(xlabel)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_line_plot(path, traces, **kw) -> Path:
    path = Path(path)
    path.write_text(line_plot(traces, **kw), encoding="utf-8")
    return path
