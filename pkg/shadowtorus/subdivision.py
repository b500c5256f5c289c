"""Breadth-first box subdivision over one window of a pseudotrajectory.

Boxes live in eigen-chart coordinates about the first point of the window. A box
is pushed through the window by mapping its centre and padding the image with the
chart Lipschitz matrix; after each step the padded image is clipped to the shrunk
interior of the next rectangle and re-anchored to that rectangle's chart. A box is
pruned as soon as its padded image misses the next interior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shadowtorus.model import SystemSpec
from shadowtorus.systems import eval_forward
from shadowtorus.torus import chart_coords, displace
from shadowtorus.types import ChartBox


@dataclass(frozen=True)
class WindowOutcome:
    found: bool
    point: np.ndarray | None  # torus point whose orbit stays inside every rectangle
    chart: np.ndarray | None  # its (w, v) about the first point of the window
    depth: int
    boxes_explored: int
    deepest_step: int  # steps survived by the longest-lived box, 0..n
    terminal_half_widths: tuple[float, float]
    capped: bool
    boxes: tuple[ChartBox, ...] = ()  # surviving box about p_k for k = 0..n


def growth_scales(lip: np.ndarray, n: int) -> np.ndarray:
    """Column maxima of lip^n: predicted growth of w and v half-widths over n steps."""

    power = np.linalg.matrix_power(np.asarray(lip, dtype=float), max(int(n), 0))
    return np.max(power, axis=0)


def padded_image(
    sys: SystemSpec,
    p: np.ndarray,
    q: np.ndarray,
    c: np.ndarray,
    h: np.ndarray,
    lip: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Chart boxes about q holding f of the boxes c +- h about p.

    The image of each centre is padded by lip @ h componentwise.
    """

    img = eval_forward(sys, displace(sys.frame, p, c))
    nc = chart_coords(sys.frame, q, img)
    nh = np.asarray(h, dtype=float) @ lip.T
    return nc - nh, nc + nh


def propagate_boxes(
    sys: SystemSpec,
    pts: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    lip: np.ndarray,
    bound: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Push boxes (N, 2) through the window; returns (alive mask, steps survived)."""

    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    n_boxes = c.shape[0]
    alive = np.ones(n_boxes, dtype=bool)
    reach = np.zeros(n_boxes, dtype=int)
    for k in range(pts.shape[0] - 1):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        nlo, nhi = padded_image(sys, pts[k], pts[k + 1], c[idx], h[idx], lip)
        ok = np.all((nhi > -bound) & (nlo < bound), axis=1)
        nlo = np.maximum(nlo, -bound)
        nhi = np.minimum(nhi, bound)
        c[idx] = 0.5 * (nlo + nhi)
        h[idx] = 0.5 * (nhi - nlo)
        reach[idx[ok]] = k + 1
        alive[idx[~ok]] = False
    return alive, reach


def box_chain(
    sys: SystemSpec,
    pts: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    lip: np.ndarray,
    bound: np.ndarray,
) -> tuple[ChartBox, ...]:
    """One box pushed through the window, clipped to the interior at every step."""

    lo = np.asarray(lo, dtype=float).reshape(1, 2)
    hi = np.asarray(hi, dtype=float).reshape(1, 2)
    out = [ChartBox.from_bounds(pts[0], lo[0], hi[0])]
    for k in range(pts.shape[0] - 1):
        c, h = 0.5 * (lo + hi), 0.5 * (hi - lo)
        lo, hi = padded_image(sys, pts[k], pts[k + 1], c, h, lip)
        lo, hi = np.maximum(lo, -bound), np.minimum(hi, bound)
        out.append(ChartBox.from_bounds(pts[k + 1], lo[0], hi[0]))
    return tuple(out)


def orbit_stays_inside(
    sys: SystemSpec, pts: np.ndarray, starts: np.ndarray, bound: np.ndarray
) -> np.ndarray:
    """Mask of start points (torus coordinates) whose orbits stay strictly inside."""

    x = np.asarray(starts, dtype=float).reshape(-1, 2)
    ok = np.all(np.abs(chart_coords(sys.frame, pts[0], x)) < bound, axis=1)
    for k in range(1, pts.shape[0]):
        x = eval_forward(sys, x)
        ok &= np.all(np.abs(chart_coords(sys.frame, pts[k], x)) < bound, axis=1)
    return ok


def _split(
    lo: np.ndarray, hi: np.ndarray, scales: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Halve each box along its longer scaled side; ties split v.

    Children follow their parent in (lower, upper) order.
    """

    half = 0.5 * (hi - lo) * scales
    axis = np.where(half[:, 1] >= half[:, 0], 1, 0)
    mid = 0.5 * (lo + hi)
    rows = np.arange(lo.shape[0])

    lo_a, hi_a = lo.copy(), hi.copy()
    hi_a[rows, axis] = mid[rows, axis]
    lo_b, hi_b = lo.copy(), hi.copy()
    lo_b[rows, axis] = mid[rows, axis]

    new_lo = np.empty((2 * lo.shape[0], 2))
    new_hi = np.empty_like(new_lo)
    new_lo[0::2], new_lo[1::2] = lo_a, lo_b
    new_hi[0::2], new_hi[1::2] = hi_a, hi_b
    return new_lo, new_hi


def search_window(
    sys: SystemSpec,
    pts: np.ndarray,
    init_lo: np.ndarray,
    init_hi: np.ndarray,
    *,
    lip: np.ndarray,
    bound: np.ndarray,
    max_depth: int,
    max_boxes: int,
) -> WindowOutcome:
    """Find a point of the initial box whose orbit stays in every shrunk interior.

    Surviving boxes are tested by the true orbit of their centres, in box order, and
    split when no centre passes.
    """

    n = pts.shape[0] - 1
    scales = growth_scales(lip, n)
    lo = np.asarray(init_lo, dtype=float).reshape(1, 2).copy()
    hi = np.asarray(init_hi, dtype=float).reshape(1, 2).copy()
    explored = 0
    deepest = 0
    capped = False

    for depth in range(max_depth + 1):
        explored += lo.shape[0]
        alive, reach = propagate_boxes(sys, pts, lo, hi, lip, bound)
        deepest = max(deepest, int(np.max(reach)))
        if not np.any(alive):
            break
        lo, hi = lo[alive], hi[alive]

        centers = 0.5 * (lo + hi)
        starts = displace(sys.frame, pts[0], centers)
        ok = orbit_stays_inside(sys, pts, starts, bound)
        if np.any(ok):
            i = int(np.flatnonzero(ok)[0])
            hw, hv = 0.5 * (hi[i] - lo[i])
            return WindowOutcome(
                found=True,
                point=starts[i],
                chart=centers[i],
                depth=depth,
                boxes_explored=explored,
                deepest_step=n,
                terminal_half_widths=(float(hw), float(hv)),
                capped=capped,
                boxes=box_chain(sys, pts, lo[i], hi[i], lip, bound),
            )
        if depth == max_depth:
            break
        lo, hi = _split(lo, hi, scales)
        if lo.shape[0] > max_boxes:
            lo, hi = lo[:max_boxes], hi[:max_boxes]
            capped = True

    return WindowOutcome(
        found=False,
        point=None,
        chart=None,
        depth=depth,
        boxes_explored=explored,
        deepest_step=deepest,
        terminal_half_widths=(0.0, 0.0),
        capped=capped,
    )
