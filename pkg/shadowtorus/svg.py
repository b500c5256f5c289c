"""Flat SVG overlays on the unit square.

Orbit polylines are split wherever consecutive points wrap around the torus, and
rectangle outlines that cross an edge are repeated at the neighbouring translates
and clipped to the square.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from shadowtorus.frame import EigenFrame
from shadowtorus.torus import as_points

SIZE = 512
WRAP_JUMP = 0.5

_HEADER = """<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<svg xmlns="http://www.w3.org/2000/svg"
 width="{0}" height="{0}" viewBox="0 0 {0} {0}">
<defs><clipPath id="unit"><rect x="0" y="0" width="{0}" height="{0}"/></clipPath></defs>
<rect x="0" y="0" width="{0}" height="{0}"
 style="fill:#ffffff;stroke:#000000;stroke-width:1"/>
<g clip-path="url(#unit)">
"""
_FOOTER = "</g>\n</svg>\n"


def _xy(p: np.ndarray) -> str:
    # y grows upwards on the torus, downwards in SVG
    return f"{p[0] * SIZE:.3f},{(1.0 - p[1]) * SIZE:.3f}"


def wrapped_segments(pts: np.ndarray) -> list[np.ndarray]:
    """Split a reduced orbit into runs without wraparound jumps."""

    arr = np.asarray(pts, dtype=float).reshape(-1, 2)
    if arr.shape[0] == 0:
        return []
    jumps = np.flatnonzero(np.any(np.abs(np.diff(arr, axis=0)) > WRAP_JUMP, axis=1))
    return [seg for seg in np.split(arr, jumps + 1) if seg.shape[0] > 0]


def _polyline(pts: np.ndarray, color: str) -> str:
    coords = " ".join(_xy(p) for p in pts)
    return (
        f'<polyline points="{coords}" '
        f'style="fill:none;stroke:{color};stroke-width:1;stroke-opacity:0.8"/>\n'
    )


def _dots(pts: np.ndarray, color: str, radius: float) -> str:
    return "".join(
        f'<circle cx="{p[0] * SIZE:.3f}" cy="{(1.0 - p[1]) * SIZE:.3f}" '
        f'r="{radius}" style="fill:{color}"/>\n'
        for p in pts
    )


def rect_outline(
    frame: EigenFrame, center: np.ndarray, delta1: float, delta2: float
) -> str:
    c = as_points(center)
    offsets = np.array(
        [[-delta2, -delta1], [delta2, -delta1], [delta2, delta1], [-delta2, delta1]]
    )
    corners = c + frame.from_chart(offsets)
    shifts = [(0.0, 0.0)]
    if np.any(corners < 0.0) or np.any(corners > 1.0):
        shifts = [(sx, sy) for sx in (-1.0, 0.0, 1.0) for sy in (-1.0, 0.0, 1.0)]
    out = []
    for sx, sy in shifts:
        moved = corners + np.array([sx, sy])
        coords = " ".join(_xy(p) for p in moved)
        out.append(
            f'<polygon points="{coords}" '
            'style="fill:none;stroke:#2a9d3f;stroke-width:0.8"/>\n'
        )
    return "".join(out)


def render_overlay(
    frame: EigenFrame,
    pseudo: np.ndarray,
    shadow: np.ndarray | None = None,
    rects: Sequence[tuple[np.ndarray, float, float]] = (),
) -> str:
    """Pseudo-orbit points, the shadow orbit and rectangle outlines in one SVG."""

    parts = [_HEADER.format(SIZE)]
    for center, d1, d2 in rects:
        parts.append(rect_outline(frame, center, d1, d2))
    for seg in wrapped_segments(pseudo):
        parts.append(_polyline(seg, "#9aa0a6"))
    parts.append(_dots(np.asarray(pseudo).reshape(-1, 2), "#1f5fbf", 1.5))
    if shadow is not None:
        for seg in wrapped_segments(shadow):
            parts.append(_polyline(seg, "#d1495b"))
    parts.append(_FOOTER)
    return "".join(parts)


def write_svg(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
