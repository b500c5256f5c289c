"""Sampled checkers for the rectangle conditions.

Every checker evaluates images of sampled source points in the eigen-chart about
the image of the base point and reports the smallest slack over all samples. The
slack is positive exactly when the sampled inclusion or disjointness holds.
"""

from __future__ import annotations

import logging
import math

import numpy as np

from shadowtorus.errors import ChartOverflow, EmptySample, InvalidParameters
from shadowtorus.model import SystemSpec
from shadowtorus.rect import (
    FACE_TOL,
    LyapPair,
    RectSpec,
    retraction_rho0,
    retraction_sigma,
)
from shadowtorus.sampling import (
    GridSpec,
    base_points,
    core_samples,
    rect_samples,
    s_samples,
)
from shadowtorus.systems import eval_forward, eval_inverse
from shadowtorus.torus import LocalDisp, TorusPoint, chart_coords, displace
from shadowtorus.types import ConditionReport

logger = logging.getLogger(__name__)

MAPPING_CONDITIONS = ("C5", "C6", "C7", "C8", "C9")
C1_GRID_N = 64
ALPHA_FLOOR = 0.5


def check_C1(
    sys: SystemSpec, pair: LyapPair, eps: float, grid_n: int = C1_GRID_N
) -> ConditionReport:
    """Largest Delta0 = eps 2^(-j / grid_n) whose chart square fits in B(eps, p).

    The frame is flat, so the check reduces to Delta0 * corner_norm < eps.
    """

    if not eps > 0:
        raise InvalidParameters(f"eps must be > 0 (got {eps})")
    if grid_n < 1:
        raise InvalidParameters(f"grid_n must be >= 1 (got {grid_n})")
    cn = pair.frame.corner_norm
    j = max(1, int(math.floor(grid_n * math.log2(max(cn, 1.0)))) + 1)
    delta0 = eps * 2.0 ** (-j / grid_n)
    while delta0 * cn >= eps:
        j += 1
        delta0 = eps * 2.0 ** (-j / grid_n)

    corner = sys.frame.from_chart(np.array([delta0, delta0]))
    return ConditionReport.from_margin(
        "C1",
        {"eps": eps, "Delta0": delta0},
        eps - delta0 * cn,
        witness={"corner_offset": [float(x) for x in corner]},
        details={"grid_index": j, "grid_n": grid_n, "corner_norm": cn},
    )


def check_retraction_axioms(
    delta1: float,
    delta2: float,
    Delta: float,
    sample_n: int = 256,
    seed: int = 0,
    *,
    alpha_floor: float = ALPHA_FLOOR,
) -> ConditionReport:
    """Sampled retraction axioms for rho0 (C3) and sigma (C4), plus the C2 facts."""

    if not (0 < delta1 and 0 < delta2 < Delta):
        raise InvalidParameters(
            "need 0 < delta1 and 0 < delta2 < Delta "
            f"(got {delta1}, {delta2}, {Delta})"
        )
    if sample_n < 2:
        raise EmptySample(f"sample_n must be >= 2 (got {sample_n})")

    rng = np.random.default_rng(seed)
    rect = RectSpec(center=TorusPoint(0.0, 0.0), a=delta1, b=delta2)

    # rho0 on P(delta1, delta2) minus the core.
    ws = rng.uniform(-delta2, delta2, sample_n)
    vs = rng.uniform(-delta1, delta1, sample_n)
    vs = np.where(vs == 0.0, delta1 / 2, vs)
    rho_idem = 0.0
    rho_fix = 0.0
    rho_onto = 0.0
    for w, v in zip(ws, vs):
        q = LocalDisp(w=float(w), v=float(v))
        once = retraction_rho0(rect, q)
        twice = retraction_rho0(rect, once)
        rho_idem = max(rho_idem, abs(twice.w - once.w) + abs(twice.v - once.v))
        rho_onto = max(rho_onto, abs(abs(once.v) - delta1))
        on_q = LocalDisp(w=float(w), v=math.copysign(delta1, v))
        fixed = retraction_rho0(rect, on_q)
        rho_fix = max(rho_fix, abs(fixed.w - on_q.w) + abs(fixed.v - on_q.v))

    # sigma on P(delta1, Delta).
    ws = rng.uniform(-Delta, Delta, sample_n)
    vs = rng.uniform(-delta1, delta1, sample_n)
    sig_idem = 0.0
    sig_fix = 0.0
    sig_lip = 0.0
    v_ratio = math.inf
    prev: tuple[LocalDisp, LocalDisp] | None = None
    for w, v in zip(ws, vs):
        q = LocalDisp(w=float(w), v=float(v))
        s = retraction_sigma(delta1, delta2, Delta, q)
        ss = retraction_sigma(delta1, delta2, Delta, s)
        sig_idem = max(sig_idem, abs(ss.w - s.w) + abs(ss.v - s.v))
        if abs(q.w) <= delta2:
            sig_fix = max(sig_fix, abs(s.w - q.w) + abs(s.v - q.v))
        if q.v != 0.0:
            v_ratio = min(v_ratio, abs(s.v) / abs(q.v))
        if prev is not None:
            dq = math.hypot(q.w - prev[0].w, q.v - prev[0].v)
            ds = math.hypot(s.w - prev[1].w, s.v - prev[1].v)
            if dq > 0:
                sig_lip = max(sig_lip, ds / dq)
        prev = (q, s)

    # C2: the two Q faces sit 2 delta1 apart; P is convex, so sampled midpoints stay.
    separation = 2.0 * delta1
    mids_w = 0.5 * (ws[:-1] + ws[1:])
    mids_v = 0.5 * (vs[:-1] + vs[1:])
    mids_inside = bool(
        np.all(np.abs(mids_w) <= Delta) and np.all(np.abs(mids_v) <= delta1)
    )

    residual = max(rho_idem, rho_fix, rho_onto, sig_idem, sig_fix)
    margin = min(v_ratio - alpha_floor, separation) - residual
    if not mids_inside:
        margin = min(margin, -1.0)
    return ConditionReport.from_margin(
        "C2-C4",
        {"delta1": delta1, "delta2": delta2, "Delta": Delta},
        margin,
        n_samples=2 * sample_n,
        details={
            "rho0_idempotence": rho_idem,
            "rho0_fixes_Q": rho_fix,
            "rho0_onto_Q": rho_onto,
            "sigma_idempotence": sig_idem,
            "sigma_fixes_target": sig_fix,
            "sigma_lipschitz": sig_lip,
            "sigma_v_ratio_min": v_ratio,
            "alpha_floor": alpha_floor,
            "q_face_separation": separation,
            "p_path_connected": mids_inside,
            "C2": "analytic: Q has two components, P is connected",
        },
    )


def validate_mapping_params(
    pair: LyapPair, delta1: float, delta2: float, Delta: float
) -> None:
    if Delta * pair.frame.corner_norm >= pair.chart_radius:
        raise ChartOverflow(
            f"Delta = {Delta} reaches past the chart radius {pair.chart_radius:.6g}"
        )
    if not (delta1 > 0 and delta2 > 0):
        raise InvalidParameters(
            f"delta1 and delta2 must be > 0 (got {delta1}, {delta2})"
        )
    if not (delta1 < Delta and delta2 < Delta):
        raise InvalidParameters(
            f"need delta1, delta2 < Delta (got {delta1}, {delta2}, {Delta})"
        )
    if not Delta < pair.delta1_cap:
        raise InvalidParameters(
            f"Delta = {Delta} must be below Delta1 = {pair.delta1_cap:.6g}"
        )


def _image_coords(
    sys: SystemSpec, bases: np.ndarray, src: np.ndarray, *, inverse: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Chart coordinates of f(q) about f(p) for q = p + src.

    Both returned arrays have shape (n_base, n_src, 2).
    """

    step = eval_inverse if inverse else eval_forward
    pts = displace(sys.frame, bases[:, None, :], src[None, :, :])
    img = step(sys, pts.reshape(-1, 2)).reshape(pts.shape)
    img_base = step(sys, bases)
    return pts, chart_coords(sys.frame, img_base[:, None, :], img)


def _argmin_witness(
    margins: np.ndarray, bases: np.ndarray, pts: np.ndarray, coords: np.ndarray
) -> tuple[float, dict[str, list[float]]]:
    i, j = np.unravel_index(int(np.argmin(margins)), margins.shape)
    witness = {
        "p": [float(x) for x in bases[i]],
        "q": [float(x) for x in pts[i, j]],
        "image_chart": [float(x) for x in coords[i, j]],
    }
    return float(margins[i, j]), witness


def check_mapping_condition(
    sys: SystemSpec,
    pair: LyapPair,
    cond: str,
    delta1: float,
    delta2: float,
    Delta: float,
    grid: GridSpec | None = None,
) -> ConditionReport:
    grid = grid or GridSpec()
    if cond not in MAPPING_CONDITIONS:
        raise InvalidParameters(f"unknown mapping condition {cond!r}")
    validate_mapping_params(pair, delta1, delta2, Delta)

    bases = base_points(sys, grid, Delta)
    params = {"delta1": delta1, "delta2": delta2, "Delta": Delta}
    details: dict[str, object] = {}

    if cond == "C5":
        src = rect_samples(delta1, delta2, grid)
    elif cond == "C6":
        src = core_samples(delta2, grid)
    elif cond == "C7":
        src = core_samples(Delta, grid)
    elif cond == "C8":
        src = rect_samples(delta1, delta2, grid)
    else:
        src = s_samples(delta1, Delta, grid)
    if src.shape[0] == 0:
        raise EmptySample(f"{cond}: the source set has no samples")

    pts, c = _image_coords(sys, bases, src)
    aw, av = np.abs(c[..., 0]), np.abs(c[..., 1])

    if cond == "C5":
        # f(P(d1, d2, p)) in Int P(Delta, Delta, f(p)), and the inverse clause.
        margins = Delta - np.maximum(aw, av)
        margin, witness = _argmin_witness(margins, bases, pts, c)
        ipts, ic = _image_coords(sys, bases, src, inverse=True)
        inv_margins = Delta - np.maximum(np.abs(ic[..., 0]), np.abs(ic[..., 1]))
        inv_margin, inv_witness = _argmin_witness(inv_margins, bases, ipts, ic)
        details = {"forward_margin": margin, "inverse_margin": inv_margin}
        if inv_margin < margin:
            margin, witness = inv_margin, inv_witness
    elif cond == "C6":
        # f(T(d1, d2, p)) in Int0 P(d1, d2, f(p)).
        margins = np.minimum(delta1 - av, delta2 - aw)
        margin, witness = _argmin_witness(margins, bases, pts, c)
    elif cond == "C7":
        # f(T(d1, Delta, p)) misses Q(d1, d2, f(p)).
        margins = np.maximum(np.abs(av - delta1), aw - delta2)
        margin, witness = _argmin_witness(margins, bases, pts, c)
    elif cond == "C8":
        # Image points in the band |v| <= d1 must keep W < d2, so that every
        # boundary hit lands on the open Q face.
        band = av <= delta1 + FACE_TOL
        margins = np.where(band, delta2 - aw, delta2)
        margin, witness = _argmin_witness(margins, bases, pts, c)
        on_q = np.abs(av - delta1) <= FACE_TOL
        on_w = np.abs(aw - delta2) <= FACE_TOL
        hits = band & (on_q | on_w)
        details = {
            "band_samples": int(np.count_nonzero(band)),
            "boundary_hits": int(np.count_nonzero(hits)),
            "boundary_hits_q_face": int(np.count_nonzero(hits & on_q & ~on_w)),
        }
    else:
        # f(S(d1, Delta, p)) misses P(d1, d2, f(p)).
        margins = np.maximum(av - delta1, aw - delta2)
        margin, witness = _argmin_witness(margins, bases, pts, c)

    report = ConditionReport.from_margin(
        cond,
        params,
        margin,
        witness=witness,
        n_base=bases.shape[0],
        n_samples=int(src.shape[0]),
        details=details,
    )
    logger.debug("%s: margin=%.6g passed=%s", cond, report.min_margin, report.passed)
    return report


def check_all_mapping_conditions(
    sys: SystemSpec,
    pair: LyapPair,
    delta1: float,
    delta2: float,
    Delta: float,
    grid: GridSpec | None = None,
) -> list[ConditionReport]:
    return [
        check_mapping_condition(sys, pair, cond, delta1, delta2, Delta, grid)
        for cond in MAPPING_CONDITIONS
    ]
