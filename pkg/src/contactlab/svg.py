"""Phase portraits of the disk as plain SVG path data."""

from __future__ import annotations

import html

import numpy as np

from .disk import RADIUS

SIZE = 600
PAD = 20
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _xy(z):
    scale = (SIZE / 2 - PAD) / RADIUS
    return SIZE / 2 + scale * np.real(z), SIZE / 2 - scale * np.imag(z)


def polyline(z, color="#000", width=1.0, dash=None) -> str:
    z = np.asarray(z)
    z = z[np.isfinite(z)]
    if z.size < 2:
        return ""
    x, y = _xy(z)
    d = "M" + " L".join(f"{a:.3f},{b:.3f}" for a, b in zip(x, y))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<path d="{d}" fill="none" stroke="{color}" stroke-width="{width}"{extra}/>'


def dot(z, color="#000", r=2.0) -> str:
    x, y = _xy(complex(z))
    return f'<circle cx="{x:.3f}" cy="{y:.3f}" r="{r}" fill="{color}"/>'


def phase_portrait(trajectories, arcs=(), config: dict | None = None, title: str = "") -> str:
    """SVG with the unit-capacity disk, the given arcs (label, points) and trajectory polylines.

    The first line is an XML comment carrying ``config`` so the figure can be regenerated.
    """
    import json

    parts = []
    if config is not None:
        parts.append(f"<!-- config: {html.escape(json.dumps(config, sort_keys=True), quote=False)} -->")
    parts.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
                 f'viewBox="0 0 {SIZE} {SIZE}">')
    parts.append('<rect width="100%" height="100%" fill="white"/>')
    c = SIZE / 2
    parts.append(f'<circle cx="{c}" cy="{c}" r="{c - PAD}" fill="none" stroke="#000" stroke-width="1.5"/>')
    parts.append(f'<line x1="{PAD}" y1="{c}" x2="{SIZE - PAD}" y2="{c}" stroke="#bbb" stroke-width="0.5"/>')
    parts.append(f'<line x1="{c}" y1="{PAD}" x2="{c}" y2="{SIZE - PAD}" stroke="#bbb" stroke-width="0.5"/>')
    for k, (label, pts) in enumerate(arcs):
        parts.append(f"<g><title>{html.escape(label)}</title>"
                     f"{polyline(pts, '#444' if k == 0 else '#999', 2.0, None if k == 0 else '6,4')}</g>")
    for k, pts in enumerate(trajectories):
        col = PALETTE[k % len(PALETTE)]
        parts.append(polyline(pts, col, 0.8))
        parts.append(dot(np.asarray(pts)[0], col))
    if title:
        parts.append(f'<text x="{PAD}" y="{PAD}" font-family="sans-serif" font-size="12">{html.escape(title)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
