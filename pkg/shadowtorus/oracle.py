from __future__ import annotations

import numpy as np

from shadowtorus.errors import InvalidParameters
from shadowtorus.model import SystemSpec
from shadowtorus.orbits import Pseudotrajectory
from shadowtorus.systems import eval_forward
from shadowtorus.torus import chart_coords, displace
from shadowtorus.types import OracleResult

ORACLE_MAX_STEPS = 8
ORACLE_MAX_GRID = 512


def brute_force_shadow(
    sys: SystemSpec,
    ptraj: Pseudotrajectory,
    delta1: float,
    delta2: float,
    grid_n: int,
    *,
    slack: float = 1e-9,
) -> OracleResult:
    """Exhaustive search over the cell centres of a grid_n x grid_n grid on P(p0).

    A centre is feasible when its orbit stays in every shrunk Int0 P(delta1, delta2,
    p_k). The feasible centre of least worst violation max(|v|/delta1, |w|/delta2) - 1
    is returned, or the overall least violating centre when none is feasible.
    """

    m = ptraj.m
    if m > ORACLE_MAX_STEPS:
        raise InvalidParameters(f"oracle needs m <= {ORACLE_MAX_STEPS} (got {m})")
    if not (1 <= grid_n <= ORACLE_MAX_GRID):
        raise InvalidParameters(
            f"grid_n must lie in [1, {ORACLE_MAX_GRID}] (got {grid_n})"
        )
    if not (delta1 > 0 and delta2 > 0):
        raise InvalidParameters(
            f"delta1 and delta2 must be > 0 (got {delta1}, {delta2})"
        )

    pts = ptraj.points
    hw, hv = 2.0 * delta2 / grid_n, 2.0 * delta1 / grid_n
    ws = -delta2 + (np.arange(grid_n) + 0.5) * hw
    vs = -delta1 + (np.arange(grid_n) + 0.5) * hv
    gw, gv = np.meshgrid(ws, vs, indexing="ij")
    chart0 = np.stack([gw.ravel(), gv.ravel()], axis=-1)

    x = displace(sys.frame, pts[0], chart0)
    start = x.copy()
    worst = np.full(x.shape[0], -np.inf)
    feasible = np.ones(x.shape[0], dtype=bool)
    for k in range(m + 1):
        if k > 0:
            x = eval_forward(sys, x)
        c = chart_coords(sys.frame, pts[k], x)
        aw, av = np.abs(c[:, 0]), np.abs(c[:, 1])
        worst = np.maximum(worst, np.maximum(av / delta1, aw / delta2) - 1.0)
        feasible &= (av < delta1 - slack) & (aw < delta2 - slack)

    if np.any(feasible):
        cand = np.flatnonzero(feasible)
        i = int(cand[np.argmin(worst[cand])])
    else:
        i = int(np.argmin(worst))
    return OracleResult(
        point=(float(start[i, 0]), float(start[i, 1])),
        chart=(float(chart0[i, 0]), float(chart0[i, 1])),
        feasible=bool(feasible[i]),
        violation=float(worst[i]),
        spacing=(float(hw), float(hv)),
    )
