from __future__ import annotations

import math

import numpy as np
import pytest

from shadowtorus.errors import InvalidParameters, OutOfChart
from shadowtorus.frame import make_frame
from shadowtorus.torus import (
    LocalDisp,
    TorusPoint,
    chart_coords,
    chart_coords_checked,
    displace,
    local_disp,
    reduce_mod1,
    torus_dist,
)

ALPHA = (3.0 - math.sqrt(5.0)) / 2.0
BETA = (3.0 + math.sqrt(5.0)) / 2.0


def test_cat_frame_eigenvalues_and_chart_constants() -> None:
    frame = make_frame()
    assert frame.alpha == pytest.approx(ALPHA, abs=1e-15)
    assert frame.beta == pytest.approx(BETA, abs=1e-15)
    assert frame.alpha * frame.beta == pytest.approx(1.0, abs=1e-14)

    a = frame.matrix_array
    assert np.allclose(a @ frame.u_contract, frame.alpha * frame.u_contract)
    assert np.allclose(a @ frame.u_expand, frame.beta * frame.u_expand)

    # Symmetric matrix: the chart is orthonormal.
    assert frame.cond == pytest.approx(1.0, abs=1e-12)
    assert frame.chart_radius == pytest.approx(0.25, abs=1e-12)
    assert frame.corner_norm == pytest.approx(math.sqrt(2.0), abs=1e-12)
    assert np.allclose(frame.matrix_inv_array @ a, np.eye(2))


@pytest.mark.parametrize(
    "matrix, match",
    [
        ([[2, 1], [1, 2]], "det 1"),
        ([[1, 1], [0, 1]], "trace > 2"),
        ([[2.5, 1], [1, 1]], "integer"),
        ([[2, 1, 0], [1, 1, 0]], "2x2"),
    ],
)
def test_make_frame_rejects_non_hyperbolic_matrices(matrix, match: str) -> None:
    with pytest.raises(InvalidParameters, match=match):
        make_frame(matrix)


def test_reduce_mod1_never_returns_one() -> None:
    out = reduce_mod1(np.array([-1e-18, 1.0, 2.25, -0.75]))
    assert np.all(out >= 0.0) and np.all(out < 1.0)
    assert out[2] == pytest.approx(0.25)
    assert out[3] == pytest.approx(0.25)


def test_torus_point_is_reduced_on_construction() -> None:
    p = TorusPoint(1.25, -0.5)
    assert (p.x, p.y) == pytest.approx((0.25, 0.5))
    assert TorusPoint.from_array(p.as_array()) == p


def test_torus_dist_uses_nearest_lift() -> None:
    assert torus_dist([0.05, 0.5], [0.95, 0.5]) == pytest.approx(0.1)
    assert torus_dist([0.0, 0.0], [0.5, 0.5]) == pytest.approx(math.sqrt(0.5))
    pts = np.array([[0.0, 0.0], [0.99, 0.99]])
    d = torus_dist(pts, np.zeros(2))
    assert d.shape == (2,)
    assert d[1] == pytest.approx(math.hypot(0.01, 0.01))


def test_displace_then_chart_coords_recovers_offset() -> None:
    frame = make_frame()
    p = np.array([0.97, 0.02])
    wv = np.array([[0.01, -0.02], [-0.03, 0.005]])
    q = displace(frame, p, wv)
    assert np.allclose(chart_coords(frame, p, q), wv, atol=1e-14)

    d = local_disp(frame, p, q[0])
    assert isinstance(d, LocalDisp)
    assert (d.w, d.v) == pytest.approx((0.01, -0.02), abs=1e-14)


def test_chart_coords_checked_rejects_far_points() -> None:
    frame = make_frame()
    with pytest.raises(OutOfChart, match="chart radius"):
        chart_coords_checked(frame, [0.0, 0.0], [0.3, 0.0])
