from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from shadowtorus.errors import InvalidParameters
from shadowtorus.frame import EigenFrame
from shadowtorus.model import SystemSpec
from shadowtorus.systems import eval_forward, eval_inverse, map_for_system
from shadowtorus.torus import (
    PointLike,
    TorusPoint,
    as_points,
    displace,
    reduce_mod1,
    torus_dist,
)

# Noise radius factor keeping dist(p_{k+1}, f(p_k)) < d strict.
NOISE_SHRINK = 1.0 - 1e-6


@dataclass(frozen=True, eq=False)
class Pseudotrajectory:
    points: np.ndarray  # (m + 1, 2), reduced mod 1
    nominal_d: float

    @property
    def m(self) -> int:
        return int(self.points.shape[0]) - 1

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def point(self, k: int) -> TorusPoint:
        return TorusPoint.from_array(self.points[k])

    def as_points(self) -> list[TorusPoint]:
        return [TorusPoint.from_array(p) for p in self.points]

    def window(self, start: int, stop: int) -> "Pseudotrajectory":
        """Points start..stop inclusive."""

        return Pseudotrajectory(
            points=self.points[start : stop + 1], nominal_d=self.nominal_d
        )

    @staticmethod
    def from_points(
        pts: Sequence[TorusPoint] | np.ndarray, nominal_d: float
    ) -> "Pseudotrajectory":
        if isinstance(pts, np.ndarray):
            arr = np.asarray(pts, dtype=float)
        else:
            arr = as_points(list(pts))
        return Pseudotrajectory(
            points=reduce_mod1(arr.reshape(-1, 2)), nominal_d=float(nominal_d)
        )


def generate_pseudotrajectory(
    sys: SystemSpec,
    p0: PointLike,
    d: float,
    m: int,
    seed: int,
) -> Pseudotrajectory:
    """p_{k+1} = f(p_k) + noise, noise uniform in the disc of radius d (1 - 1e-6)."""

    if not (d >= 0.0 and math.isfinite(d)):
        raise InvalidParameters(f"d must be >= 0 (got {d})")
    if m < 1:
        raise InvalidParameters(f"m must be >= 1 (got {m})")

    fmap = map_for_system(sys)
    rng = np.random.default_rng(seed)
    radius = d * NOISE_SHRINK
    rad = radius * np.sqrt(rng.random(m))
    ang = 2.0 * math.pi * rng.random(m)
    noise = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)

    pts = np.empty((m + 1, 2))
    pts[0] = reduce_mod1(as_points(p0))
    for k in range(m):
        pts[k + 1] = reduce_mod1(fmap.forward(pts[k]) + noise[k])
    return Pseudotrajectory(points=pts, nominal_d=float(d))


def step_defects(sys: SystemSpec, seq: Pseudotrajectory | np.ndarray) -> np.ndarray:
    """dist(p_{k+1}, f(p_k)) for k = 0..m-1."""

    pts = seq.points if isinstance(seq, Pseudotrajectory) else as_points(seq)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 2:
        return np.zeros(0)
    return np.asarray(torus_dist(pts[1:], eval_forward(sys, pts[:-1])), dtype=float)


def is_pseudotrajectory(
    sys: SystemSpec,
    seq: Pseudotrajectory | np.ndarray | Sequence[TorusPoint],
    d: float,
) -> int | None:
    """None if every step satisfies dist(p_{k+1}, f(p_k)) < d, else the first k."""

    if isinstance(seq, Pseudotrajectory):
        pts = seq.points
    elif isinstance(seq, np.ndarray):
        pts = seq
    else:
        pts = as_points(list(seq)) if len(seq) else np.zeros((0, 2))
    defects = step_defects(sys, np.asarray(pts, dtype=float).reshape(-1, 2))
    bad = np.flatnonzero(~(defects < d))
    return int(bad[0]) if bad.size else None


def rho_grid(grid_n: int) -> np.ndarray:
    """Points (i/n, j/n); grids for n and 2n are nested."""

    ticks = np.arange(grid_n, dtype=float) / grid_n
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    return np.stack([gx.ravel(), gy.ravel()], axis=-1)


def rho_distance(sys_f: SystemSpec, sys_g: SystemSpec, grid_n: int) -> float:
    """max over the grid of max(dist(f(p), g(p)), dist(f^-1(p), g^-1(p)))."""

    if grid_n < 2:
        raise InvalidParameters(f"grid_n must be >= 2 (got {grid_n})")
    pts = rho_grid(grid_n)
    fwd = torus_dist(eval_forward(sys_f, pts), eval_forward(sys_g, pts))
    bwd = torus_dist(eval_inverse(sys_f, pts), eval_inverse(sys_g, pts))
    return float(max(np.max(fwd), np.max(bwd)))


def displace_point(
    ptraj: Pseudotrajectory, frame: EigenFrame, k: int, wv: np.ndarray
) -> Pseudotrajectory:
    """Copy of ``ptraj`` with p_k moved by the chart displacement ``wv``."""

    if not (0 <= k <= ptraj.m):
        raise InvalidParameters(f"k must lie in [0, {ptraj.m}] (got {k})")
    pts = ptraj.points.copy()
    pts[k] = displace(frame, pts[k], np.asarray(wv, dtype=float))
    return Pseudotrajectory(points=pts, nominal_d=ptraj.nominal_d)
