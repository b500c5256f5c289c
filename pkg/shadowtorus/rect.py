from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from shadowtorus.errors import ChartOverflow, InvalidParameters, OnCore, OutOfRect
from shadowtorus.frame import EigenFrame
from shadowtorus.torus import LocalDisp, PointLike, TorusPoint, displace, local_disp

FACE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LyapPair:
    """V(q, p) = |v| and W(q, p) = |w| for (w, v) = local_disp(p, q)."""

    frame: EigenFrame
    delta_cap: float | None = None  # global smallness constant, chart_radius / 4

    @property
    def chart_radius(self) -> float:
        return self.frame.chart_radius

    @property
    def delta1_cap(self) -> float:
        if self.delta_cap is not None:
            return float(self.delta_cap)
        return self.chart_radius / 4.0

    def vw(self, q: PointLike, p: PointLike) -> tuple[float, float]:
        d = local_disp(self.frame, p, q)
        return abs(d.v), abs(d.w)


def eval_V(pair: LyapPair, q: PointLike, p: PointLike) -> float:
    return pair.vw(q, p)[0]


def eval_W(pair: LyapPair, q: PointLike, p: PointLike) -> float:
    return pair.vw(q, p)[1]


@dataclass(frozen=True)
class RectSpec:
    """P(a, b, p): the chart square [-b, b] x [-a, a] in (w, v) about ``center``."""

    center: TorusPoint
    a: float  # bound on V
    b: float  # bound on W

    def point_at(self, pair: LyapPair, d: LocalDisp) -> TorusPoint:
        return TorusPoint.from_array(displace(pair.frame, self.center, d.as_array()))

    def corners(self, pair: LyapPair) -> np.ndarray:
        wv = np.array(
            [[-self.b, -self.a], [self.b, -self.a], [self.b, self.a], [-self.b, self.a]]
        )
        return displace(pair.frame, self.center, wv)


def validate_rect(rect: RectSpec, pair: LyapPair) -> None:
    if not (rect.a > 0 and rect.b > 0):
        raise InvalidParameters(
            f"rectangle bounds must be > 0 (got a={rect.a}, b={rect.b})"
        )
    reach = max(rect.a, rect.b) * pair.frame.corner_norm
    if reach >= pair.chart_radius:
        raise ChartOverflow(
            f"rectangle reaches {reach:.6g}, beyond the chart radius "
            f"{pair.chart_radius:.6g}"
        )


class RegionClass(str, Enum):
    OUTSIDE = "outside"
    INT0 = "int0"
    QFACE = "q_face"  # V = a, W < b
    WFACE = "w_face"  # W = b, V < a
    CORNER = "corner"  # V = a, W = b
    TCORE = "t_core"  # V = 0, W < b

    @property
    def in_interior(self) -> bool:
        """Int0 P: V < a and W < b (the core included)."""

        return self in (RegionClass.INT0, RegionClass.TCORE)

    @property
    def on_boundary(self) -> bool:
        return self in (RegionClass.QFACE, RegionClass.WFACE, RegionClass.CORNER)


def region_of(
    w: float, v: float, a: float, b: float, tol: float = FACE_TOL
) -> RegionClass:
    big_v, big_w = abs(v), abs(w)
    if big_v > a + tol or big_w > b + tol:
        return RegionClass.OUTSIDE
    on_q = abs(big_v - a) <= tol
    on_w = abs(big_w - b) <= tol
    if on_q and on_w:
        return RegionClass.CORNER
    if on_q:
        return RegionClass.QFACE
    if on_w:
        return RegionClass.WFACE
    if big_v <= tol:
        return RegionClass.TCORE
    return RegionClass.INT0


def classify_region(
    rect: RectSpec, pair: LyapPair, q: PointLike, tol: float = FACE_TOL
) -> RegionClass:
    d = local_disp(pair.frame, rect.center, q)
    return region_of(d.w, d.v, rect.a, rect.b, tol)


def retraction_rho0(rect: RectSpec, q: LocalDisp, tol: float = FACE_TOL) -> LocalDisp:
    """Vertical push-out of P minus T onto Q: (w, v) -> (w, a sign v)."""

    if abs(q.v) > rect.a + tol or abs(q.w) > rect.b + tol:
        raise OutOfRect(f"({q.w:.6g}, {q.v:.6g}) is outside P(a={rect.a}, b={rect.b})")
    if q.v == 0.0:
        raise OnCore("rho0 is undefined on the core T where V = 0")
    return LocalDisp(w=q.w, v=rect.a if q.v > 0 else -rect.a)


def retraction_sigma(
    delta1: float, delta2: float, Delta: float, q: LocalDisp, tol: float = FACE_TOL
) -> LocalDisp:
    """Retraction of P(delta1, Delta, p) onto P(delta1, delta2, p) clamping w.

    v is untouched, so V(sigma(q), p) = V(q, p).
    """

    if not delta2 < Delta:
        raise InvalidParameters(f"delta2 must be < Delta (got {delta2} >= {Delta})")
    if abs(q.v) > delta1 + tol or abs(q.w) > Delta + tol:
        raise OutOfRect(
            f"({q.w:.6g}, {q.v:.6g}) is outside P(delta1={delta1}, Delta={Delta})"
        )
    return LocalDisp(w=float(np.clip(q.w, -delta2, delta2)), v=q.v)
