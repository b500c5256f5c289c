from __future__ import annotations

import numpy as np
import pytest

from shadowtorus.errors import ChartOverflow, EmptySample, OnCore, OutOfRect
from shadowtorus.frame import make_frame
from shadowtorus.rect import (
    LyapPair,
    RectSpec,
    RegionClass,
    classify_region,
    eval_V,
    eval_W,
    region_of,
    retraction_rho0,
    retraction_sigma,
    validate_rect,
)
from shadowtorus.sampling import (
    GridSpec,
    base_points,
    core_samples,
    q_face_samples,
    rect_samples,
    s_samples,
)
from shadowtorus.torus import LocalDisp, TorusPoint, displace


@pytest.fixture()
def pair() -> LyapPair:
    return LyapPair(frame=make_frame())


def test_lyapunov_pair_reads_chart_components(pair: LyapPair) -> None:
    p = np.array([0.4, 0.6])
    q = displace(pair.frame, p, np.array([0.002, -0.005]))
    assert eval_V(pair, q, p) == pytest.approx(0.005, abs=1e-14)
    assert eval_W(pair, q, p) == pytest.approx(0.002, abs=1e-14)
    assert pair.delta1_cap == pytest.approx(0.0625)


@pytest.mark.parametrize(
    "w, v, expected",
    [
        (0.0, 0.0, RegionClass.TCORE),
        (0.005, 0.0, RegionClass.TCORE),
        (0.005, 0.003, RegionClass.INT0),
        (0.005, 0.01, RegionClass.QFACE),
        (0.02, 0.003, RegionClass.WFACE),
        (-0.02, -0.01, RegionClass.CORNER),
        (0.0, 0.011, RegionClass.OUTSIDE),
    ],
)
def test_region_of_classifies_faces(w: float, v: float, expected: RegionClass) -> None:
    got = region_of(w, v, a=0.01, b=0.02)
    assert got is expected


def test_region_flags() -> None:
    assert RegionClass.TCORE.in_interior and RegionClass.INT0.in_interior
    assert not RegionClass.QFACE.in_interior
    assert RegionClass.CORNER.on_boundary and not RegionClass.OUTSIDE.on_boundary


def test_classify_region_about_a_center(pair: LyapPair) -> None:
    center = TorusPoint(0.99, 0.01)
    rect = RectSpec(center=center, a=0.01, b=0.01)
    q = displace(pair.frame, center.as_array(), np.array([0.0, 0.01]))
    assert classify_region(rect, pair, q) is RegionClass.QFACE


def test_rect_corners_sit_at_the_chart_corners(pair: LyapPair) -> None:
    rect = RectSpec(center=TorusPoint(0.5, 0.5), a=0.01, b=0.02)
    corners = rect.corners(pair)
    assert corners.shape == (4, 2)
    for c in corners:
        assert classify_region(rect, pair, c) is RegionClass.CORNER
    pt = rect.point_at(pair, LocalDisp(w=0.0, v=0.005))
    assert classify_region(rect, pair, pt) is RegionClass.INT0


def test_validate_rect_rejects_oversized_rectangles(pair: LyapPair) -> None:
    validate_rect(RectSpec(center=TorusPoint(0.0, 0.0), a=0.1, b=0.1), pair)
    with pytest.raises(ChartOverflow):
        validate_rect(RectSpec(center=TorusPoint(0.0, 0.0), a=0.2, b=0.01), pair)


def test_rho0_pushes_vertically_onto_the_q_faces() -> None:
    rect = RectSpec(center=TorusPoint(0.0, 0.0), a=0.01, b=0.02)
    assert retraction_rho0(rect, LocalDisp(w=0.005, v=-0.002)) == LocalDisp(
        w=0.005, v=-0.01
    )
    with pytest.raises(OnCore):
        retraction_rho0(rect, LocalDisp(w=0.005, v=0.0))
    with pytest.raises(OutOfRect):
        retraction_rho0(rect, LocalDisp(w=0.05, v=0.005))


def test_sigma_clamps_w_and_keeps_v() -> None:
    s = retraction_sigma(0.01, 0.02, 0.03, LocalDisp(w=0.025, v=0.004))
    assert s == LocalDisp(w=0.02, v=0.004)
    inside = LocalDisp(w=-0.01, v=0.009)
    assert retraction_sigma(0.01, 0.02, 0.03, inside) == inside
    with pytest.raises(OutOfRect):
        retraction_sigma(0.01, 0.02, 0.03, LocalDisp(w=0.04, v=0.0))


def test_rect_samples_cover_faces_interior_and_center() -> None:
    grid = GridSpec(face_n=8, interior_n=16)
    s = rect_samples(0.01, 0.02, grid)
    assert s.shape == (4 * 8 + 16 + 1, 2)
    assert np.all(np.abs(s[:, 0]) <= 0.02) and np.all(np.abs(s[:, 1]) <= 0.01)
    assert np.any(np.all(s == 0.0, axis=1))

    q = q_face_samples(0.01, 0.02, 8)
    assert np.allclose(np.abs(q[:, 1]), 0.01)


def test_core_and_s_samples_stay_in_their_sets() -> None:
    grid = GridSpec(face_n=16, interior_n=64)
    core = core_samples(0.03, grid)
    assert np.all(core[:, 1] == 0.0) and np.max(np.abs(core[:, 0])) == 0.03

    s = s_samples(0.01, 0.03, grid)
    assert np.all(np.abs(s[:, 1]) >= 0.01 - 1e-15)
    assert np.all(np.abs(s) <= 0.03 + 1e-15)


def test_base_points_include_the_support_grid(lewowicz_system, linear_system) -> None:
    grid = GridSpec(base_n=4, support_n=5)
    assert base_points(linear_system, grid, 0.01).shape == (16, 2)
    pts = base_points(lewowicz_system, grid, 0.01)
    assert pts.shape == (16 + 25, 2)
    # Odd support_n puts a base point on the fixed point.
    assert np.any(np.all(np.abs(pts[16:]) < 1e-15, axis=1))

    with pytest.raises(EmptySample):
        base_points(linear_system, GridSpec(base_n=0), 0.01)


def test_grid_spec_json_defaults() -> None:
    assert GridSpec.from_json(None) == GridSpec()
    g = GridSpec.from_json({"face_n": 12})
    assert g.face_n == 12 and g.base_n == 8
    assert GridSpec.from_json(g.to_json()) == g
