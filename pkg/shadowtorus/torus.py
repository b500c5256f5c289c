from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from shadowtorus.errors import OutOfChart
from shadowtorus.frame import EigenFrame


def reduce_mod1(arr: np.ndarray) -> np.ndarray:
    """Reduce coordinates into [0, 1); np.mod can round tiny negatives up to 1.0."""

    r = np.mod(np.asarray(arr, dtype=float), 1.0)
    return np.where(r >= 1.0, 0.0, r)


@dataclass(frozen=True)
class TorusPoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        rx, ry = reduce_mod1(np.array([self.x, self.y], dtype=float))
        object.__setattr__(self, "x", float(rx))
        object.__setattr__(self, "y", float(ry))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @staticmethod
    def from_array(arr: np.ndarray | Sequence[float]) -> "TorusPoint":
        a = np.asarray(arr, dtype=float)
        return TorusPoint(x=float(a[0]), y=float(a[1]))

    def to_json(self) -> list[float]:
        return [self.x, self.y]


@dataclass(frozen=True)
class LocalDisp:
    w: float  # contracting component
    v: float  # expanding component

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.v], dtype=float)

    @staticmethod
    def from_array(arr: np.ndarray | Sequence[float]) -> "LocalDisp":
        a = np.asarray(arr, dtype=float)
        return LocalDisp(w=float(a[0]), v=float(a[1]))


PointLike = Union[TorusPoint, np.ndarray, Sequence[float]]


def as_points(p: PointLike | Sequence[TorusPoint]) -> np.ndarray:
    if isinstance(p, TorusPoint):
        return p.as_array()
    if isinstance(p, (list, tuple)) and p and isinstance(p[0], TorusPoint):
        return np.array([q.as_array() for q in p], dtype=float)
    return np.asarray(p, dtype=float)


def nearest_lift_diff(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """q - p over the nearest integer translate; per-coordinate rounding is exact
    for the Euclidean norm on Z^2."""

    d = np.asarray(q, dtype=float) - np.asarray(p, dtype=float)
    return d - np.rint(d)


def torus_dist(p: PointLike, q: PointLike) -> float | np.ndarray:
    d = np.linalg.norm(nearest_lift_diff(as_points(p), as_points(q)), axis=-1)
    if np.ndim(d) == 0:
        return float(d)
    return d


def displace(frame: EigenFrame, p: PointLike, wv: np.ndarray) -> np.ndarray:
    """Point(s) at chart offset ``wv`` from ``p``, reduced mod 1."""

    return reduce_mod1(as_points(p) + frame.from_chart(np.asarray(wv, dtype=float)))


def chart_coords(frame: EigenFrame, base: PointLike, pts: PointLike) -> np.ndarray:
    """Chart coordinates of ``pts`` about ``base`` via the nearest lift, unchecked."""

    return frame.to_chart(nearest_lift_diff(as_points(base), as_points(pts)))


def chart_coords_checked(
    frame: EigenFrame, base: PointLike, pts: PointLike
) -> np.ndarray:
    diff = nearest_lift_diff(as_points(base), as_points(pts))
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist >= frame.chart_radius):
        raise OutOfChart(
            f"points at torus distance {float(np.max(dist)):.6g} exceed the chart "
            f"radius {frame.chart_radius:.6g}"
        )
    return frame.to_chart(diff)


def local_disp(frame: EigenFrame, p: PointLike, q: PointLike) -> LocalDisp:
    return LocalDisp.from_array(chart_coords_checked(frame, p, q))


def origin_chart_coords(frame: EigenFrame, pts: np.ndarray) -> np.ndarray:
    """Chart coordinates of the lift nearest the origin (the perturbation centre)."""

    z = np.asarray(pts, dtype=float)
    return frame.to_chart(z - np.rint(z))
