from __future__ import annotations

import logging
import math

import numpy as np

from shadowtorus.conditions import (
    check_all_mapping_conditions,
    check_C1,
    validate_mapping_params,
)
from shadowtorus.errors import ChainFailed, InvalidParameters, NoPositiveD
from shadowtorus.model import SystemSpec
from shadowtorus.rect import FACE_TOL, LyapPair, RectSpec, validate_rect
from shadowtorus.sampling import GridSpec, base_points, q_face_samples, rect_samples
from shadowtorus.systems import eval_forward
from shadowtorus.torus import (
    PointLike,
    TorusPoint,
    as_points,
    chart_coords,
    displace,
)
from shadowtorus.types import ConditionReport, ParameterChain

logger = logging.getLogger(__name__)

SPHERE_SHRINK = 1.0 - 1e-6
N_RANDOM_DIRECTIONS = 16
D_BISECTION_STEPS = 30
DELTA_GRID_STEPS = 24  # delta = Delta 2^(-j/4), j = 1..24
RELAX_RADIUS = 2


def _image_cloud(sys: SystemSpec, bases: np.ndarray, src: np.ndarray) -> np.ndarray:
    """Chart coordinates of f(p + src) about f(p), shape (n_base, n_src, 2)."""

    pts = displace(sys.frame, bases[:, None, :], src[None, :, :])
    img = eval_forward(sys, pts.reshape(-1, 2)).reshape(pts.shape)
    return chart_coords(sys.frame, eval_forward(sys, bases)[:, None, :], img)


def _pair_margins(
    p_img: np.ndarray,
    q_img: np.ndarray,
    shifts: np.ndarray,
    delta1: float,
    delta2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Boundary and exit margins for every shift of p' about f(p).

    ``p_img`` and ``q_img`` are (..., n, 2) image clouds of P and Q, ``shifts`` is
    (..., k, 2). Returns two (..., k) arrays.
    """

    pw = p_img[..., None, :, 0] - shifts[..., :, None, 0]
    pv = p_img[..., None, :, 1] - shifts[..., :, None, 1]
    band = np.abs(pv) < delta1
    m4 = np.min(np.where(band, delta2 - np.abs(pw), delta2), axis=-1)

    qw = q_img[..., None, :, 0] - shifts[..., :, None, 0]
    qv = q_img[..., None, :, 1] - shifts[..., :, None, 1]
    m5 = np.min(np.maximum(np.abs(qv) - delta1, np.abs(qw) - delta2), axis=-1)
    return m4, m5


def check_wazewski_pair(
    sys: SystemSpec,
    pair: LyapPair,
    p: PointLike,
    p_next: PointLike,
    delta1: float,
    delta2: float,
    grid: GridSpec | None = None,
) -> ConditionReport:
    """Sampled check that f(P) meets the boundary of P' only in Q' and f(Q) misses P'.

    The retraction clause follows from both margins for these rectangles and is
    recorded, not computed.
    """

    grid = grid or GridSpec()
    if not (delta1 > 0 and delta2 > 0):
        raise InvalidParameters(
            f"delta1 and delta2 must be > 0 (got {delta1}, {delta2})"
        )
    base = as_points(p).reshape(1, 2)
    for center in (base[0], as_points(p_next).reshape(2)):
        rect = RectSpec(center=TorusPoint.from_array(center), a=delta1, b=delta2)
        validate_rect(rect, pair)
    fp = eval_forward(sys, base)
    shift = chart_coords(sys.frame, fp, as_points(p_next).reshape(1, 2))

    p_src = rect_samples(delta1, delta2, grid)
    q_src = q_face_samples(delta1, delta2, max(grid.face_n, 2))
    p_img = _image_cloud(sys, base, p_src)[0]
    q_img = _image_cloud(sys, base, q_src)[0]

    m4, m5 = _pair_margins(p_img, q_img, shift, delta1, delta2)
    margin4, margin5 = float(m4[0]), float(m5[0])
    return ConditionReport.from_margin(
        "W-pair",
        {"delta1": delta1, "delta2": delta2},
        min(margin4, margin5),
        witness={
            "p": [float(x) for x in base[0]],
            "p_next": [float(x) for x in as_points(p_next)],
            "shift_chart": [float(x) for x in shift[0]],
        },
        n_samples=int(p_src.shape[0] + q_src.shape[0]),
        details={
            "margin_boundary": margin4,
            "margin_exit": margin5,
            "retraction": "analytic, contingent on the boundary and exit margins",
        },
    )


def _shift_directions(sys: SystemSpec, n_random: int, seed: int) -> np.ndarray:
    u_c, u_e = sys.frame.u_contract, sys.frame.u_expand
    extremal = [u_c, -u_c, u_e, -u_e, u_c + u_e, u_c - u_e, -u_c + u_e, -u_c - u_e]
    dirs = [d / np.linalg.norm(d) for d in extremal]
    ang = np.random.default_rng(seed).uniform(0.0, 2.0 * math.pi, n_random)
    dirs.extend(np.stack([np.cos(ang), np.sin(ang)], axis=-1))
    return np.asarray(dirs, dtype=float)


def estimate_d(
    sys: SystemSpec,
    pair: LyapPair,
    delta1: float,
    delta2: float,
    Delta: float,
    grid: GridSpec | None = None,
    *,
    seed: int = 0,
    n_random: int = N_RANDOM_DIRECTIONS,
    steps: int = D_BISECTION_STEPS,
) -> float:
    """Largest d for which the pair condition holds with p' on the d-sphere about f(p).

    Bisection over [0, Delta]; p' is placed at radius d (1 - 1e-6) in eight extremal
    directions and ``n_random`` seeded ones, for every sampled base point.
    """

    grid = grid or GridSpec()
    validate_mapping_params(pair, delta1, delta2, Delta)
    bases = base_points(sys, grid, Delta)
    p_img = _image_cloud(sys, bases, rect_samples(delta1, delta2, grid))
    q_img = _image_cloud(
        sys, bases, q_face_samples(delta1, delta2, max(grid.face_n, 2))
    )
    chart_dirs = sys.frame.to_chart(_shift_directions(sys, n_random, seed))

    def passes(d: float) -> bool:
        shifts = np.broadcast_to(
            d * SPHERE_SHRINK * chart_dirs, (bases.shape[0],) + chart_dirs.shape
        )
        m4, m5 = _pair_margins(p_img, q_img, shifts, delta1, delta2)
        return bool(np.all(m4 > 0) and np.all(m5 > 0))

    if not passes(0.0):
        raise NoPositiveD(
            f"pair condition fails at d = 0 for delta1={delta1}, delta2={delta2}"
        )
    lo, hi = 0.0, float(Delta)
    if passes(hi):
        return hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    if lo <= 0.0:
        raise NoPositiveD(
            f"no positive d resolved for delta1={delta1}, delta2={delta2}"
        )
    return lo


def _try_candidate(
    sys: SystemSpec,
    pair: LyapPair,
    delta1: float,
    delta2: float,
    Delta: float,
    grid: GridSpec,
) -> tuple[float | None, list[ConditionReport]]:
    reports = check_all_mapping_conditions(sys, pair, delta1, delta2, Delta, grid)
    if not all(r.passed for r in reports):
        return None, reports
    try:
        return estimate_d(sys, pair, delta1, delta2, Delta, grid), reports
    except NoPositiveD:
        return None, reports


def derive_parameter_chain(
    sys: SystemSpec,
    pair: LyapPair,
    eps: float,
    grid: GridSpec | None = None,
) -> ParameterChain:
    """Delta0 from C1, Delta = Delta0 / 2, then the (delta1, delta2) of largest d.

    Balanced choices delta1 = delta2 are tried first; the neighbourhood of the best
    balanced index is then relaxed independently in each coordinate.
    """

    grid = grid or GridSpec()
    if not eps > 0:
        raise InvalidParameters(f"eps must be > 0 (got {eps})")
    if eps <= 2.0 * FACE_TOL:
        raise ChainFailed(
            f"eps = {eps} is below the resolution 2 * {FACE_TOL}", condition="C1"
        )

    c1 = check_C1(sys, pair, eps)
    delta0 = c1.params["Delta0"]
    Delta = min(0.5 * delta0, 0.99 * pair.delta1_cap)
    logger.info("chain: eps=%.6g Delta0=%.6g Delta=%.6g", eps, delta0, Delta)

    def delta_at(j: int) -> float:
        return Delta * 2.0 ** (-j / 4.0)

    tried = 0
    best: tuple[float, int, int, list[ConditionReport]] | None = None
    last_failure = "C5"

    def consider(j1: int, j2: int) -> None:
        nonlocal tried, best, last_failure
        tried += 1
        d, reports = _try_candidate(
            sys, pair, delta_at(j1), delta_at(j2), Delta, grid
        )
        failed = [r.condition for r in reports if not r.passed]
        if failed:
            last_failure = failed[0]
        elif d is None:
            last_failure = "W-pair"
        if d is not None and (best is None or d > best[0]):
            best = (d, j1, j2, reports)

    for j in range(1, DELTA_GRID_STEPS + 1):
        consider(j, j)

    if best is not None:
        _, j_best, _, _ = best
        lo = max(1, j_best - RELAX_RADIUS)
        hi = min(DELTA_GRID_STEPS, j_best + RELAX_RADIUS)
        for j1 in range(lo, hi + 1):
            for j2 in range(lo, hi + 1):
                if j1 != j2:
                    consider(j1, j2)
    else:
        for j1 in range(2, DELTA_GRID_STEPS + 1, 2):
            for j2 in range(2, DELTA_GRID_STEPS + 1, 2):
                if j1 != j2:
                    consider(j1, j2)

    if best is None:
        raise ChainFailed(
            f"no (delta1, delta2) below Delta = {Delta:.6g} passes every condition; "
            f"last failure: {last_failure}",
            condition=last_failure,
        )

    d, j1, j2, reports = best
    logger.info(
        "chain: delta1=%.6g delta2=%.6g d=%.6g after %d candidates",
        delta_at(j1),
        delta_at(j2),
        d,
        tried,
    )
    return ParameterChain(
        eps=float(eps),
        Delta0=float(delta0),
        Delta=float(Delta),
        delta1=float(delta_at(j1)),
        delta2=float(delta_at(j2)),
        d=float(d),
        reports=(c1, *reports),
        candidates_tried=tried,
    )
