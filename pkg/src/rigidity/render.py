"""Deterministic SVG rendering of 2-D frameworks and face diagrams.

Stress signs are color-coded (positive tension-like members vs negative),
pins get square markers.  3-D frameworks must be projected explicitly.
"""
from __future__ import annotations

import numpy as np

from .core import Framework, FrameworkError

POS_COLOR = "#c0392b"
NEG_COLOR = "#2d6fb4"
ZERO_COLOR = "#7f8c8d"
PIN_COLOR = "#111111"

ISO = np.array([[0.866, -0.866, 0.0], [0.5, 0.5, -1.0]])


def project_points(points: np.ndarray, mode: str | None) -> np.ndarray:
    if points.shape[1] == 2:
        return points
    if points.shape[1] == 1:
        return np.hstack([points, np.zeros_like(points)])
    if mode is None:
        raise FrameworkError("projection", "3-D input requires a --project mode (xy or iso)")
    if mode == "xy":
        return points[:, :2]
    if mode == "iso":
        return points[:, :3] @ ISO.T
    raise FrameworkError("projection", f"unknown projection {mode!r}")


def render_svg(
    f: Framework,
    stress: np.ndarray | None = None,
    project: str | None = None,
    size: int = 420,
) -> str:
    pts = project_points(f.points, project)
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = float(max((hi - lo).max(), 1e-9))
    margin = 0.08 * span
    lo = lo - margin
    scale = size / (span + 2 * margin)

    def xy(p):
        q = (p - lo) * scale
        return q[0], size - q[1]

    stress_scale = 0.0
    if stress is not None:
        stress = np.asarray(stress, dtype=float)
        stress_scale = float(np.abs(stress).max()) + 1e-300
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for k, (i, j) in enumerate(f.edges):
        x1, y1 = xy(pts[i])
        x2, y2 = xy(pts[j])
        color = ZERO_COLOR
        width = 1.6
        if stress is not None:
            v = stress[k]
            if v > 1e-9 * stress_scale:
                color, width = POS_COLOR, 2.2
            elif v < -1e-9 * stress_scale:
                color, width = NEG_COLOR, 2.2
        lines.append(
            f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
            f'stroke="{color}" stroke-width="{width}" class="edge"/>'
        )
    for i in range(f.n):
        x, y = xy(pts[i])
        if i in f.pins:
            lines.append(
                f'<rect x="{x - 5:.3f}" y="{y - 5:.3f}" width="10" height="10" '
                f'fill="{PIN_COLOR}" class="pin"/>'
            )
        else:
            lines.append(
                f'<circle cx="{x:.3f}" cy="{y:.3f}" r="4" fill="#34495e" class="vertex"/>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
