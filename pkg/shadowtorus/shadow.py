from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from shadowtorus.errors import ChartOverflow, Exhausted, InvalidParameters
from shadowtorus.model import SystemSpec
from shadowtorus.orbits import Pseudotrajectory, step_defects
from shadowtorus.rect import LyapPair
from shadowtorus.sampling import GridSpec
from shadowtorus.subdivision import WindowOutcome, search_window
from shadowtorus.systems import chart_lipschitz_matrix, eval_forward, orbit
from shadowtorus.torus import PointLike, as_points, chart_coords, displace, torus_dist
from shadowtorus.types import (
    ChartBox,
    LipschitzCheck,
    ShadowResult,
    ShadowViolation,
)
from shadowtorus.wazewski import check_wazewski_pair

logger = logging.getLogger(__name__)

PADDING_MODES = ("matrix", "scalar")
LIPSCHITZ_REL_TOL = 1e-6
JUNCTION_SEARCH_SHARE = 0.45  # junction search half-width per unit of junction_tol


@dataclass(frozen=True)
class SolverConfig:
    max_depth: int = 64
    window: int = 24
    stride: int = 4
    slack: float = 1e-9  # Int0 sets are shrunk by this much
    junction_tol: float = 1e-9
    max_boxes: int = 4096
    widen: float = 16.0
    padding: str = "matrix"  # "scalar": L * (h_w + h_v) in both coordinates

    @staticmethod
    def from_json(obj: dict[str, Any] | None) -> "SolverConfig":
        obj = obj or {}
        base = SolverConfig()
        return SolverConfig(
            max_depth=int(obj.get("max_depth", base.max_depth)),
            window=int(obj.get("window", base.window)),
            stride=int(obj.get("stride", base.stride)),
            slack=float(obj.get("slack", base.slack)),
            junction_tol=float(obj.get("junction_tol", base.junction_tol)),
            max_boxes=int(obj.get("max_boxes", base.max_boxes)),
            widen=float(obj.get("widen", base.widen)),
            padding=str(obj.get("padding", base.padding)),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "max_depth": self.max_depth,
            "window": self.window,
            "stride": self.stride,
            "slack": self.slack,
            "junction_tol": self.junction_tol,
            "max_boxes": self.max_boxes,
            "widen": self.widen,
            "padding": self.padding,
        }


def validate_solver_config(cfg: SolverConfig) -> None:
    if cfg.max_depth < 1:
        raise InvalidParameters(f"max_depth must be >= 1 (got {cfg.max_depth})")
    if cfg.window < 2:
        raise InvalidParameters(f"window must be >= 2 (got {cfg.window})")
    if not (1 <= cfg.stride < cfg.window):
        raise InvalidParameters(
            f"stride must lie in [1, window) (got {cfg.stride}, window={cfg.window})"
        )
    if cfg.slack < 0 or cfg.junction_tol <= 0:
        raise InvalidParameters("slack must be >= 0 and junction_tol > 0")
    if cfg.max_boxes < 2:
        raise InvalidParameters(f"max_boxes must be >= 2 (got {cfg.max_boxes})")
    if not cfg.widen > 1:
        raise InvalidParameters(f"widen must be > 1 (got {cfg.widen})")
    if cfg.padding not in PADDING_MODES:
        raise InvalidParameters(
            f"padding must be one of {PADDING_MODES} (got {cfg.padding!r})"
        )


def lipschitz_bound(sys: SystemSpec) -> float:
    """Operator 2-norm bound of the forward map's increments in the eigen-chart."""

    return float(np.linalg.norm(chart_lipschitz_matrix(sys), 2))


def check_lipschitz_samples(
    sys: SystemSpec,
    n: int = 2000,
    seed: int = 0,
    *,
    bound: float | None = None,
    scale: float = 1e-3,
) -> LipschitzCheck:
    """Sampled chart difference quotients against ``bound`` (default lipschitz_bound).

    Half of the base points are drawn from the perturbation support when r > 0.
    """

    if n < 1:
        raise InvalidParameters(f"n must be >= 1 (got {n})")
    lip = lipschitz_bound(sys) if bound is None else float(bound)
    rng = np.random.default_rng(seed)
    p = rng.random((n, 2))
    if sys.r > 0:
        half = n // 2
        local = rng.uniform(-sys.r, sys.r, size=(half, 2))
        p[:half] = displace(sys.frame, np.zeros(2), local)

    ang = rng.uniform(0.0, 2.0 * math.pi, n)
    rad = scale * (1.0 - rng.random(n))
    dz = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)
    q = displace(sys.frame, p, dz)
    diff = chart_coords(sys.frame, eval_forward(sys, p), eval_forward(sys, q))
    quot = np.linalg.norm(diff, axis=-1) / np.linalg.norm(dz, axis=-1)
    worst = float(np.max(quot))
    return LipschitzCheck(
        bound=lip,
        max_quotient=worst,
        n_samples=n,
        passed=worst <= lip * (1.0 + LIPSCHITZ_REL_TOL),
    )


def _padding_matrix(sys: SystemSpec, cfg: SolverConfig) -> np.ndarray:
    if cfg.padding == "matrix":
        return chart_lipschitz_matrix(sys)
    return lipschitz_bound(sys) * np.ones((2, 2))


def _diagnose(
    sys: SystemSpec,
    pair: LyapPair,
    pts: np.ndarray,
    start: int,
    deepest: int,
    delta1: float,
    delta2: float,
    grid: GridSpec,
) -> tuple[int, str]:
    m = pts.shape[0] - 1
    for j in range(start, min(deepest, m - 1) + 1):
        report = check_wazewski_pair(
            sys, pair, pts[j], pts[j + 1], delta1, delta2, grid
        )
        if not report.passed:
            return j, "condition W violated"
    return min(deepest + 1, m), "resolution insufficient"


def shadow_finite(
    sys: SystemSpec,
    pair: LyapPair,
    ptraj: Pseudotrajectory,
    delta1: float,
    delta2: float,
    config: SolverConfig | None = None,
    *,
    grid: GridSpec | None = None,
) -> ShadowResult:
    """Find an orbit that stays in Int0 P(delta1, delta2, p_k) for k = 0..m.

    Trajectories longer than one window are covered by overlapping windows. Each
    window after the first searches a small box about the junction iterate of the
    previous one, widened on failure up to a half-width that keeps the junction
    defect below ``junction_tol``. A junction that cannot be matched raises
    Exhausted. The result carries the surviving chart box at every step.
    """

    cfg = config or SolverConfig()
    validate_solver_config(cfg)
    grid = grid or GridSpec()
    if not (delta1 > 0 and delta2 > 0):
        raise InvalidParameters(
            f"delta1 and delta2 must be > 0 (got {delta1}, {delta2})"
        )
    if max(delta1, delta2) * pair.frame.corner_norm >= pair.chart_radius:
        raise ChartOverflow(
            f"rectangle P({delta1}, {delta2}) reaches past the chart radius "
            f"{pair.chart_radius:.6g}"
        )
    bound = np.array([delta2 - cfg.slack, delta1 - cfg.slack])
    if np.any(bound <= 0):
        raise InvalidParameters("slack must be smaller than delta1 and delta2")

    pts = ptraj.points
    m = ptraj.m
    lip = _padding_matrix(sys, cfg)
    beta = sys.beta

    chained: list[np.ndarray] = []
    boxes: list[ChartBox] = []
    junctions: list[float] = []
    outcomes: list[WindowOutcome] = []
    widenings = 0
    start = 0
    prev_orbit: np.ndarray | None = None
    prev_len = 0

    while True:
        n = min(cfg.window, m - start)
        win = pts[start : start + n + 1]
        if prev_orbit is None:
            outcome = search_window(
                sys,
                win,
                -bound,
                bound,
                lip=lip,
                bound=bound,
                max_depth=cfg.max_depth,
                max_boxes=cfg.max_boxes,
            )
        else:
            junction = prev_orbit[cfg.stride]
            c0 = chart_coords(sys.frame, win[0], junction)
            # Any centre within eta of c0 in both chart coordinates lies within
            # 2 eta of the junction iterate.
            eta_cap = JUNCTION_SEARCH_SHARE * cfg.junction_tol
            eta = 4.0 * max(delta1, delta2) * beta ** (-(prev_len - cfg.stride))
            eta = min(eta, eta_cap)
            while True:
                outcome = search_window(
                    sys,
                    win,
                    np.maximum(c0 - eta, -bound),
                    np.minimum(c0 + eta, bound),
                    lip=lip,
                    bound=bound,
                    max_depth=cfg.max_depth,
                    max_boxes=cfg.max_boxes,
                )
                if outcome.found or eta >= eta_cap:
                    break
                eta = min(eta * cfg.widen, eta_cap)
                widenings += 1

        outcomes.append(outcome)
        if not outcome.found:
            deepest = start + outcome.deepest_step
            step, reason = _diagnose(
                sys, pair, pts, start, deepest, delta1, delta2, grid
            )
            logger.info(
                "shadow: window at %d exhausted (%s at step %d)", start, reason, step
            )
            raise Exhausted(
                f"no box survives at step {step}: {reason}",
                failing_step=step,
                reason=reason,
                certificate={
                    "windows_completed": len(outcomes) - 1,
                    "window_start": start,
                    "deepest_step": deepest,
                    "depth": outcome.depth,
                    "boxes_explored": outcome.boxes_explored,
                    "capped": outcome.capped,
                },
            )

        assert outcome.point is not None
        w_orbit = orbit(sys, outcome.point, n)
        if prev_orbit is not None:
            defect = float(torus_dist(prev_orbit[cfg.stride], w_orbit[0]))
            if defect > cfg.junction_tol:
                logger.info(
                    "shadow: junction at %d misses by %.3g (tol %.3g)",
                    start,
                    defect,
                    cfg.junction_tol,
                )
                raise Exhausted(
                    f"junction at step {start} misses by {defect:.3g}: "
                    "resolution insufficient",
                    failing_step=start,
                    reason="resolution insufficient",
                    certificate={
                        "windows_completed": len(outcomes) - 1,
                        "window_start": start,
                        "junction_defect": defect,
                        "junction_tol": cfg.junction_tol,
                    },
                )
            junctions.append(defect)
        last = start + n == m
        keep = n + 1 if last else cfg.stride
        chained.extend(w_orbit[:keep])
        boxes.extend(outcome.boxes[:keep])
        if last:
            break
        prev_orbit = w_orbit
        prev_len = n
        start += cfg.stride

    result_orbit = np.asarray(chained).reshape(m + 1, 2)
    per_step = np.asarray(torus_dist(result_orbit, pts), dtype=float).reshape(-1)
    first = outcomes[0]
    cn = pair.frame.corner_norm
    widths = [2.0 * cn * max(o.terminal_half_widths) for o in outcomes]
    certificate = {
        "windows": len(outcomes),
        "depth": first.depth,
        "max_depth_reached": max(o.depth for o in outcomes),
        "terminal_half_widths": list(first.terminal_half_widths),
        "terminal_width": widths[0],
        "max_terminal_width": max(widths),
        "boxes_explored": sum(o.boxes_explored for o in outcomes),
        "padding": lip.tolist(),
        "lipschitz_bound": float(np.linalg.norm(lip, 2)),
        "junction_defect_max": max(junctions, default=0.0),
        "widenings": widenings,
        "capped": any(o.capped for o in outcomes),
    }
    logger.debug(
        "shadow: m=%d windows=%d achieved_eps=%.6g", m, len(outcomes), per_step.max()
    )
    return ShadowResult(
        point=(float(result_orbit[0, 0]), float(result_orbit[0, 1])),
        achieved_eps=float(np.max(per_step)),
        per_step=tuple(float(x) for x in per_step),
        orbit=tuple((float(x), float(y)) for x, y in result_orbit),
        certificate=certificate,
        boxes=tuple(boxes),
    )


def verify_shadowing(
    sys: SystemSpec, ptraj: Pseudotrajectory, r: PointLike, eps: float
) -> ShadowViolation | None:
    """Strict check dist(f^k(r), p_k) < eps along the single-point orbit of r."""

    dists = np.asarray(
        torus_dist(orbit(sys, as_points(r), ptraj.m), ptraj.points), dtype=float
    ).reshape(-1)
    worst = int(np.argmax(dists))
    if dists[worst] < eps:
        return None
    return ShadowViolation(step=worst, distance=float(dists[worst]))


def verify_shadow_orbit(
    sys: SystemSpec,
    ptraj: Pseudotrajectory,
    orbit_pts: np.ndarray | tuple[tuple[float, float], ...],
    eps: float,
    junction_tol: float = SolverConfig.junction_tol,
) -> ShadowViolation | None:
    """Chained-orbit check: one-step defects below junction_tol, distances below eps."""

    arr = np.asarray(orbit_pts, dtype=float).reshape(-1, 2)
    if arr.shape[0] != ptraj.m + 1:
        raise InvalidParameters(
            f"orbit has {arr.shape[0]} points, expected {ptraj.m + 1}"
        )
    defects = step_defects(sys, arr)
    bad = np.flatnonzero(defects >= junction_tol)
    if bad.size:
        k = int(bad[0])
        return ShadowViolation(step=k + 1, distance=float(defects[k]), kind="junction")
    dists = np.asarray(torus_dist(arr, ptraj.points), dtype=float).reshape(-1)
    worst = int(np.argmax(dists))
    if dists[worst] < eps:
        return None
    return ShadowViolation(step=worst, distance=float(dists[worst]))
