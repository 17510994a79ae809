"""Minimal SVG emitters: log-log convergence plots and nodal heatmaps.

Hand-rolled on purpose; the toolkit's outputs must be byte-identical across
reruns, so everything is formatted with fixed precision and no timestamps,
and no plotting library is pulled in.
"""
from __future__ import annotations

import math

import numpy as np

# viridis-like anchors, interpolated to a fixed 256-step lookup table
_ANCHORS = np.array([
    (68, 1, 84), (72, 40, 120), (62, 74, 137), (49, 104, 142),
    (38, 130, 142), (31, 158, 137), (53, 183, 121), (109, 205, 89),
    (180, 222, 44), (253, 231, 37),
], dtype=float)


def _lut256() -> np.ndarray:
    x = np.linspace(0.0, 1.0, len(_ANCHORS))
    xi = np.linspace(0.0, 1.0, 256)
    return np.stack([np.interp(xi, x, _ANCHORS[:, c]) for c in range(3)], axis=1)


_LUT = _lut256()


def _color(v: float) -> str:
    idx = int(np.clip(v, 0.0, 1.0) * 255.0)
    r, g, b = _LUT[idx]
    return f"#{int(r):02x}{int(g):02x}{int(b):02x}"


def svg_heatmap(values: np.ndarray, title: str, max_cells: int = 128) -> str:
    """Heatmap of a square nodal field (side m+1 nodes), downsampled by
    striding so at most max_cells rectangles per side are drawn."""
    side = int(round(math.sqrt(values.size)))
    if side * side != values.size:
        raise ValueError("heatmap expects a square nodal field")
    V = np.asarray(values, dtype=float).reshape(side, side)
    stride = max(1, (side - 1) // max_cells)
    V = V[::stride, ::stride]
    m = V.shape[0]
    vmin, vmax = float(V.min()), float(V.max())
    span = vmax - vmin if vmax > vmin else 1.0

    size, margin = 480, 40
    cell = size / m
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{size + 2 * margin}" height="{size + 2 * margin + 20}" '
             f'viewBox="0 0 {size + 2 * margin} {size + 2 * margin + 20}">',
             f'<text x="{margin}" y="{margin - 14}" font-size="13" '
             f'font-family="sans-serif">{title}</text>']
    for j in range(m):
        for i in range(m):
            c = _color((V[j, i] - vmin) / span)
            x = margin + i * cell
            # flip y so the origin sits at the lower-left corner
            y = margin + (m - 1 - j) * cell
            parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell + 0.5:.2f}" '
                         f'height="{cell + 0.5:.2f}" fill="{c}"/>')
    parts.append(f'<rect x="{margin}" y="{margin}" width="{size}" height="{size}" '
                 f'fill="none" stroke="black"/>')
    parts.append(f'<text x="{margin}" y="{size + 2 * margin + 8}" font-size="11" '
                 f'font-family="sans-serif">min={vmin:.6e}  max={vmax:.6e}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def svg_loglog(series: dict, title: str, xlabel: str = "eps",
               ylabel: str = "relative error") -> str:
    """Log-log scatter + per-series least-squares fit line.

    ``series`` maps a label to a list of (x, y) pairs with positive values.
    """
    width, height = 560, 420
    ml, mr, mt, mb = 70, 160, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    all_x = [x for pts in series.values() for x, _ in pts]
    all_y = [y for pts in series.values() for _, y in pts]
    if not all_x or min(all_x) <= 0 or min(all_y) <= 0:
        raise ValueError("log-log plot needs positive data")
    lx0, lx1 = math.log10(min(all_x)), math.log10(max(all_x))
    ly0, ly1 = math.log10(min(all_y)), math.log10(max(all_y))
    lx0, lx1 = lx0 - 0.1 * (lx1 - lx0 + 0.1), lx1 + 0.1 * (lx1 - lx0 + 0.1)
    ly0, ly1 = ly0 - 0.1 * (ly1 - ly0 + 0.1), ly1 + 0.1 * (ly1 - ly0 + 0.1)

    def px(x):
        return ml + (math.log10(x) - lx0) / (lx1 - lx0) * pw

    def py(y):
        return mt + ph - (math.log10(y) - ly0) / (ly1 - ly0) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<text x="{ml}" y="{mt - 16}" font-size="13" font-family="sans-serif">{title}</text>',
             f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    # decade ticks
    for d in range(math.ceil(lx0), math.floor(lx1) + 1):
        x = ml + (d - lx0) / (lx1 - lx0) * pw
        parts.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" y2="{mt + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.1f}" y="{mt + ph + 18}" font-size="10" text-anchor="middle" '
                     f'font-family="sans-serif">1e{d}</text>')
    for d in range(math.ceil(ly0), math.floor(ly1) + 1):
        y = mt + ph - (d - ly0) / (ly1 - ly0) * ph
        parts.append(f'<line x1="{ml - 5}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" stroke="black"/>')
        parts.append(f'<text x="{ml - 8}" y="{y + 3:.1f}" font-size="10" text-anchor="end" '
                     f'font-family="sans-serif">1e{d}</text>')
    parts.append(f'<text x="{ml + pw / 2}" y="{height - 12}" font-size="11" text-anchor="middle" '
                 f'font-family="sans-serif">{xlabel}</text>')
    parts.append(f'<text x="16" y="{mt + ph / 2}" font-size="11" text-anchor="middle" '
                 f'font-family="sans-serif" transform="rotate(-90 16 {mt + ph / 2})">{ylabel}</text>')

    for si, (label, pts) in enumerate(series.items()):
        color = _SERIES_COLORS[si % len(_SERIES_COLORS)]
        xs = np.array([p[0] for p in pts], dtype=float)
        ys = np.array([p[1] for p in pts], dtype=float)
        slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1) if len(xs) > 1 else (0.0, np.log(ys[0]))
        for x, y in pts:
            parts.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" fill="{color}"/>')
        if len(xs) > 1:
            xf = np.array([xs.min(), xs.max()])
            yf = np.exp(intercept) * xf ** slope
            parts.append(f'<line x1="{px(xf[0]):.2f}" y1="{py(yf[0]):.2f}" '
                         f'x2="{px(xf[1]):.2f}" y2="{py(yf[1]):.2f}" '
                         f'stroke="{color}" stroke-dasharray="5,3"/>')
        ly = mt + 14 + 16 * si
        parts.append(f'<rect x="{ml + pw + 10}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{ml + pw + 25}" y="{ly}" font-size="10" font-family="sans-serif">'
                     f'{label} (slope {slope:.3f})</text>')
    parts.append("</svg>")
    return "\n".join(parts)
