from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.stats import qmc

from shadowtorus.errors import EmptySample
from shadowtorus.model import SystemSpec
from shadowtorus.torus import displace


@dataclass(frozen=True)
class GridSpec:
    """Sample densities for the condition checkers.

    Base points are a uniform ``base_n`` x ``base_n`` torus grid plus a
    ``support_n`` x ``support_n`` chart grid over the perturbation support. Each
    rectangle face gets ``face_n`` points, each interior ``interior_n`` Halton points.
    """

    base_n: int = 8
    support_n: int = 9
    face_n: int = 64
    interior_n: int = 256

    @staticmethod
    def from_json(obj: dict[str, Any] | None) -> "GridSpec":
        obj = obj or {}
        return GridSpec(
            base_n=int(obj.get("base_n", 8)),
            support_n=int(obj.get("support_n", 9)),
            face_n=int(obj.get("face_n", 64)),
            interior_n=int(obj.get("interior_n", 256)),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "base_n": self.base_n,
            "support_n": self.support_n,
            "face_n": self.face_n,
            "interior_n": self.interior_n,
        }


def base_points(sys: SystemSpec, grid: GridSpec, reach: float) -> np.ndarray:
    if grid.base_n < 1:
        raise EmptySample(f"base_n must be >= 1 (got {grid.base_n})")
    ticks = np.arange(grid.base_n, dtype=float) / grid.base_n
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    pts = [np.stack([gx.ravel(), gy.ravel()], axis=-1)]

    if sys.r > 0 and grid.support_n >= 1:
        # Odd counts put a base point on the fixed point itself.
        s = np.linspace(-(sys.r + reach), sys.r + reach, grid.support_n)
        sw, sv = np.meshgrid(s, s, indexing="ij")
        wv = np.stack([sw.ravel(), sv.ravel()], axis=-1)
        pts.append(displace(sys.frame, np.zeros(2), wv))
    return np.concatenate(pts, axis=0)


def _face_ticks(n: int, half: float) -> np.ndarray:
    return np.linspace(-half, half, n) if n >= 2 else np.zeros(max(n, 0))


def q_face_samples(a: float, b: float, face_n: int) -> np.ndarray:
    """Q(a, b): the two faces v = +-a, |w| <= b, corners included."""

    w = _face_ticks(face_n, b)
    return np.concatenate(
        [
            np.stack([w, np.full_like(w, a)], axis=-1),
            np.stack([w, np.full_like(w, -a)], axis=-1),
        ]
    )


def w_face_samples(a: float, b: float, face_n: int) -> np.ndarray:
    v = _face_ticks(face_n, a)
    return np.concatenate(
        [
            np.stack([np.full_like(v, b), v], axis=-1),
            np.stack([np.full_like(v, -b), v], axis=-1),
        ]
    )


def halton_unit(n: int) -> np.ndarray:
    if n <= 0:
        return np.zeros((0, 2))
    return qmc.Halton(d=2, scramble=False).random(n)


def interior_samples(a: float, b: float, n: int) -> np.ndarray:
    u = halton_unit(n)
    return np.stack([(2.0 * u[:, 0] - 1.0) * b, (2.0 * u[:, 1] - 1.0) * a], axis=-1)


def rect_samples(a: float, b: float, grid: GridSpec) -> np.ndarray:
    """Boundary, interior and centre of P(a, b) in chart coordinates (w, v)."""

    parts = [
        q_face_samples(a, b, grid.face_n),
        w_face_samples(a, b, grid.face_n),
        interior_samples(a, b, grid.interior_n),
        np.zeros((1, 2)),
    ]
    return np.concatenate(parts, axis=0)


def core_samples(b: float, grid: GridSpec) -> np.ndarray:
    """T(., b): v = 0, |w| <= b."""

    n = max(grid.face_n, 2)
    w = np.linspace(-b, b, n)
    return np.stack([w, np.zeros_like(w)], axis=-1)


def s_samples(delta1: float, Delta: float, grid: GridSpec) -> np.ndarray:
    """S(delta1, Delta): points of P(Delta, Delta) with |v| >= delta1."""

    w = _face_ticks(grid.face_n, Delta)
    v = np.linspace(delta1, Delta, max(grid.face_n // 4, 2))
    edges = []
    for sign in (1.0, -1.0):
        edges.append(np.stack([w, np.full_like(w, sign * delta1)], axis=-1))
        edges.append(np.stack([w, np.full_like(w, sign * Delta)], axis=-1))
        edges.append(np.stack([np.full_like(v, Delta), sign * v], axis=-1))
        edges.append(np.stack([np.full_like(v, -Delta), sign * v], axis=-1))

    u = halton_unit(grid.interior_n)
    if u.shape[0]:
        # Fold the unit square onto the two strips delta1 <= |v| <= Delta.
        mag = delta1 + (Delta - delta1) * np.abs(2.0 * u[:, 1] - 1.0)
        sign = np.where(u[:, 1] >= 0.5, 1.0, -1.0)
        edges.append(np.stack([(2.0 * u[:, 0] - 1.0) * Delta, sign * mag], axis=-1))
    return np.concatenate(edges, axis=0)
