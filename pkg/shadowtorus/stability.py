from __future__ import annotations

import logging
import math

import numpy as np

from shadowtorus.errors import (
    Exhausted,
    InvalidParameters,
    PreconditionRho,
    ShadowFailed,
)
from shadowtorus.model import SystemSpec
from shadowtorus.orbits import Pseudotrajectory, rho_distance, rho_grid
from shadowtorus.rect import LyapPair, eval_V, eval_W
from shadowtorus.sampling import GridSpec
from shadowtorus.shadow import SolverConfig, shadow_finite
from shadowtorus.systems import eval_forward, eval_inverse, perturbation_rho_bound
from shadowtorus.torus import PointLike, chart_coords, displace, torus_dist
from shadowtorus.types import (
    ConjugacyDefect,
    ConjugacySample,
    ExpansivityEstimate,
    ParameterChain,
    StabilityReport,
)
from shadowtorus.wazewski import derive_parameter_chain

logger = logging.getLogger(__name__)

EXPANSIVITY_D_MIN = 1e-6
EXPANSIVITY_D_MAX = 0.25
A_GRID_TOP = 0.5
A_GRID_STEPS = 160  # a = 0.5 2^(-j/8), j = 0..160
MONOTONE_TOL = 1e-12
DEFAULT_K = 25
RHO_GRID_MIN = 64


def estimate_expansivity(
    sys: SystemSpec,
    K: int,
    n_pairs: int,
    seed: int,
    *,
    d_min: float = EXPANSIVITY_D_MIN,
    d_max: float = EXPANSIVITY_D_MAX,
) -> ExpansivityEstimate:
    """Largest grid value a that every sampled pair exceeds within |k| <= K.

    Initial distances are log-stratified over [d_min, d_max].
    """

    if K < 1:
        raise InvalidParameters(f"K must be >= 1 (got {K})")
    if n_pairs < 1:
        raise InvalidParameters(f"n_pairs must be >= 1 (got {n_pairs})")
    rng = np.random.default_rng(seed)
    p = rng.random((n_pairs, 2))
    u = (np.arange(n_pairs) + rng.random(n_pairs)) / n_pairs
    rad = np.exp(math.log(d_min) + u * (math.log(d_max) - math.log(d_min)))
    ang = rng.uniform(0.0, 2.0 * math.pi, n_pairs)
    q = p + np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)

    # dist[k, i] for k = 0..K forward and backward
    fwd = np.empty((K + 1, n_pairs))
    bwd = np.empty((K + 1, n_pairs))
    fwd[0] = bwd[0] = np.asarray(torus_dist(p, q), dtype=float)
    xp, xq, yp, yq = p, q, p, q
    for k in range(1, K + 1):
        xp, xq = eval_forward(sys, xp), eval_forward(sys, xq)
        yp, yq = eval_inverse(sys, yp), eval_inverse(sys, yq)
        fwd[k] = torus_dist(xp, xq)
        bwd[k] = torus_dist(yp, yq)
    sep = np.maximum(fwd, bwd)
    min_sep = float(np.min(np.max(sep, axis=0)))

    grid = A_GRID_TOP * 2.0 ** (-np.arange(A_GRID_STEPS + 1) / 8.0)
    below = grid[grid < min_sep]
    a_est = float(below[0]) if below.size else 0.0

    hist = np.zeros(K + 1, dtype=int)
    if a_est > 0:
        first = np.argmax(sep > a_est, axis=0)
        hist = np.bincount(first, minlength=K + 1)[: K + 1]
    logger.info("expansivity: K=%d pairs=%d a_est=%.6g", K, n_pairs, a_est)
    return ExpansivityEstimate(
        K=int(K),
        n_pairs=int(n_pairs),
        a_est=a_est,
        min_separation=min_sep,
        histogram=tuple(int(c) for c in hist),
    )


def lewowicz_functional(pair: LyapPair, p: PointLike, q: PointLike) -> float:
    """V(p, q) - W(p, q)."""

    return eval_V(pair, q, p) - eval_W(pair, q, p)


def monotone_along_orbits(
    sys: SystemSpec,
    pair: LyapPair,
    n_pairs: int,
    steps: int,
    seed: int,
) -> float:
    """Fraction of pairs with V > W > 0 whose V - W never decreases along the orbit.

    A pair is followed until its torus distance exceeds chart_radius / 2.
    """

    if n_pairs < 1 or steps < 1:
        raise InvalidParameters("n_pairs and steps must be >= 1")
    rng = np.random.default_rng(seed)
    p = rng.random((n_pairs, 2))
    top = pair.chart_radius / 8.0
    s = np.exp(rng.uniform(math.log(1e-5), math.log(top), n_pairs))
    v = s * rng.choice([-1.0, 1.0], n_pairs)
    w = s * rng.uniform(0.05, 0.95, n_pairs) * rng.choice([-1.0, 1.0], n_pairs)
    q = displace(sys.frame, p, np.stack([w, v], axis=-1))

    limit = pair.chart_radius / 2.0
    c = chart_coords(sys.frame, p, q)
    prev = np.abs(c[:, 1]) - np.abs(c[:, 0])
    active = np.ones(n_pairs, dtype=bool)
    good = np.ones(n_pairs, dtype=bool)
    for _ in range(steps):
        p, q = eval_forward(sys, p), eval_forward(sys, q)
        active &= np.asarray(torus_dist(p, q), dtype=float) < limit
        if not np.any(active):
            break
        c = chart_coords(sys.frame, p, q)
        cur = np.abs(c[:, 1]) - np.abs(c[:, 0])
        good &= ~active | (cur >= prev - MONOTONE_TOL)
        prev = cur
    return float(np.count_nonzero(good)) / n_pairs


def _nearest_grid_index(pts: np.ndarray, grid_n: int) -> tuple[np.ndarray, np.ndarray]:
    ij = np.mod(np.rint(np.asarray(pts, dtype=float) * grid_n), grid_n).astype(int)
    return ij, ij[:, 0] * grid_n + ij[:, 1]


def conjugacy_defect(
    sys_f: SystemSpec, sys_g: SystemSpec, sample: ConjugacySample
) -> ConjugacyDefect:
    """sup dist(f(h(p)), h(g(p))) and sup dist(h(p), p) over the grid.

    h(g(p)) is read at the grid point nearest g(p). The interpolation bound is
    max dist(g(p), grid) + 2 defect_id.
    """

    n = sample.grid_n
    pts = np.asarray(sample.points, dtype=float)
    h = np.asarray(sample.h_values, dtype=float)
    if pts.shape[0] != n * n:
        raise InvalidParameters(f"sample holds {pts.shape[0]} points, expected {n * n}")

    id_d = np.asarray(torus_dist(h, pts), dtype=float).reshape(-1)
    g_pts = eval_forward(sys_g, pts)
    ij, flat = _nearest_grid_index(g_pts, n)
    snap = np.asarray(torus_dist(g_pts, ij / n), dtype=float).reshape(-1)
    conj_d = np.asarray(torus_dist(eval_forward(sys_f, h), h[flat]), dtype=float)
    conj_d = conj_d.reshape(-1)

    i_c = int(np.argmax(conj_d))
    i_i = int(np.argmax(id_d))
    defect_id = float(id_d[i_i])
    return ConjugacyDefect(
        defect_conj=float(conj_d[i_c]),
        defect_id=defect_id,
        conj_witness=(float(pts[i_c, 0]), float(pts[i_c, 1])),
        id_witness=(float(pts[i_i, 0]), float(pts[i_i, 1])),
        interpolation_bound=float(np.max(snap)) + 2.0 * defect_id,
        point_defect_id=tuple(float(x) for x in id_d),
        point_defect_conj=tuple(float(x) for x in conj_d),
    )


def _g_segments(sys_g: SystemSpec, pts: np.ndarray, K: int) -> np.ndarray:
    """(2K + 1, N, 2): g^-K(p), ..., p, ..., g^K(p) for every grid point."""

    seg = np.empty((2 * K + 1,) + pts.shape)
    seg[K] = pts
    for k in range(1, K + 1):
        seg[K + k] = eval_forward(sys_g, seg[K + k - 1])
        seg[K - k] = eval_inverse(sys_g, seg[K - k + 1])
    return seg


def build_semiconjugacy(
    sys_f: SystemSpec,
    sys_g: SystemSpec,
    eps: float,
    grid_n: int,
    K: int = DEFAULT_K,
    *,
    chain: ParameterChain | None = None,
    grid: GridSpec | None = None,
    solver: SolverConfig | None = None,
) -> tuple[ConjugacySample, StabilityReport]:
    """h(p) := the point at index K of an f-orbit shadowing g^-K(p)..g^K(p)."""

    if K < 1:
        raise InvalidParameters(f"K must be >= 1 (got {K})")
    if grid_n < 1:
        raise InvalidParameters(f"grid_n must be >= 1 (got {grid_n})")
    grid = grid or GridSpec()
    solver = solver or SolverConfig()
    pair = LyapPair(frame=sys_f.frame)
    chain = chain or derive_parameter_chain(sys_f, pair, eps, grid)

    pts = rho_grid(grid_n)
    seg = _g_segments(sys_g, pts, K)
    img = eval_forward(sys_f, seg[:-1].reshape(-1, 2)).reshape(seg[:-1].shape)
    observed = float(np.max(torus_dist(seg[1:], img)))
    rho = max(rho_distance(sys_f, sys_g, max(grid_n, RHO_GRID_MIN)), observed)
    if rho >= chain.d:
        raise PreconditionRho(
            f"rho(f, g) = {rho:.6g} is not below d = {chain.d:.6g}", rho=rho, d=chain.d
        )
    logger.info("stability: grid=%d K=%d rho=%.6g d=%.6g", grid_n, K, rho, chain.d)

    h_vals = np.empty_like(pts)
    achieved = np.empty(pts.shape[0])
    certs: list[dict[str, object]] = []
    for i in range(pts.shape[0]):
        ptraj = Pseudotrajectory(points=seg[:, i], nominal_d=rho)
        try:
            res = shadow_finite(
                sys_f, pair, ptraj, chain.delta1, chain.delta2, solver, grid=grid
            )
        except Exhausted as e:
            p = (float(pts[i, 0]), float(pts[i, 1]))
            raise ShadowFailed(
                f"shadowing the g-orbit of {p} failed: {e}", point=p
            ) from e
        h_vals[i] = res.orbit[K]
        achieved[i] = res.achieved_eps
        certs.append(
            {
                "p": [float(pts[i, 0]), float(pts[i, 1])],
                "achieved_eps": res.achieved_eps,
                "windows": res.certificate["windows"],
                "max_terminal_width": res.certificate["max_terminal_width"],
            }
        )

    sample = ConjugacySample(
        grid_n=int(grid_n),
        points=tuple((float(x), float(y)) for x, y in pts),
        h_values=tuple((float(x), float(y)) for x, y in h_vals),
        achieved_eps=tuple(float(a) for a in achieved),
        defect_conj=0.0,
        defect_id=0.0,
    )
    defects = conjugacy_defect(sys_f, sys_g, sample)
    sample = ConjugacySample(
        grid_n=sample.grid_n,
        points=sample.points,
        h_values=sample.h_values,
        achieved_eps=sample.achieved_eps,
        defect_conj=defects.defect_conj,
        defect_id=defects.defect_id,
        point_defect_id=defects.point_defect_id,
        point_defect_conj=defects.point_defect_conj,
    )
    report = StabilityReport(
        rho=rho,
        rho_bound=perturbation_rho_bound(sys_g),
        K=int(K),
        eps=float(eps),
        chain=chain,
        defect_conj=defects.defect_conj,
        defect_id=defects.defect_id,
        interpolation_bound=defects.interpolation_bound,
        box_width=max(float(c["max_terminal_width"]) for c in certs),
        n_points=int(pts.shape[0]),
        achieved_eps_max=float(np.max(achieved)),
        certificates=tuple(certs),
    )
    logger.info(
        "stability: defect_id=%.6g defect_conj=%.6g",
        report.defect_id,
        report.defect_conj,
    )
    return sample, report
