from __future__ import annotations

import math

import pytest

from shadowtorus.conditions import (
    MAPPING_CONDITIONS,
    check_all_mapping_conditions,
    check_C1,
    check_mapping_condition,
    check_retraction_axioms,
)
from shadowtorus.errors import ChartOverflow, InvalidParameters
from shadowtorus.rect import LyapPair


@pytest.fixture(scope="module")
def pair(linear_system) -> LyapPair:
    return LyapPair(frame=linear_system.frame)


def test_c1_picks_the_largest_grid_delta0_in_the_ball(linear_system, pair) -> None:
    rep = check_C1(linear_system, pair, 0.05)
    delta0 = rep.params["Delta0"]
    assert rep.passed and rep.min_margin > 0
    assert delta0 * math.sqrt(2.0) < 0.05
    # Two grid steps up no longer fits.
    assert delta0 * 2.0 ** (2.0 / 64.0) * math.sqrt(2.0) >= 0.05
    assert rep.details["corner_norm"] == pytest.approx(math.sqrt(2.0))

    with pytest.raises(InvalidParameters):
        check_C1(linear_system, pair, 0.0)


def test_retraction_axioms_hold() -> None:
    rep = check_retraction_axioms(0.01, 0.01, 0.03, sample_n=128, seed=3)
    assert rep.condition == "C2-C4"
    assert rep.passed
    assert rep.details["rho0_idempotence"] == 0.0
    assert rep.details["sigma_v_ratio_min"] == pytest.approx(1.0)
    assert rep.details["p_path_connected"] is True

    with pytest.raises(InvalidParameters):
        check_retraction_axioms(0.01, 0.03, 0.03)


def test_linear_margins_match_closed_forms(linear_system, pair) -> None:
    alpha, beta = linear_system.alpha, linear_system.beta
    d1 = d2 = 0.01

    c6 = check_mapping_condition(linear_system, pair, "C6", d1, d2, 0.02)
    assert c6.passed
    assert c6.min_margin == pytest.approx((1.0 - alpha) * d2, rel=0.1)

    c9 = check_mapping_condition(linear_system, pair, "C9", d1, d2, 0.02)
    assert c9.passed
    assert c9.min_margin == pytest.approx((beta - 1.0) * d1, rel=0.1)

    c8 = check_mapping_condition(linear_system, pair, "C8", d1, d2, 0.02)
    assert c8.min_margin == pytest.approx((1.0 - alpha) * d2, rel=0.1)
    assert c8.details["band_samples"] > 0


def test_c5_needs_delta_above_the_expanded_rectangle(linear_system, pair) -> None:
    beta = linear_system.beta
    short = check_mapping_condition(linear_system, pair, "C5", 0.01, 0.01, 0.02)
    assert not short.passed
    assert short.min_margin == pytest.approx(0.02 - beta * 0.01, abs=1e-9)
    assert set(short.witness) == {"p", "q", "image_chart"}

    ok = check_mapping_condition(linear_system, pair, "C5", 0.01, 0.01, 0.03)
    assert ok.passed
    assert ok.min_margin == pytest.approx(0.03 - beta * 0.01, abs=1e-9)
    assert ok.details["inverse_margin"] == pytest.approx(ok.min_margin, abs=1e-9)


def test_all_mapping_conditions_pass_for_linear(linear_system, pair) -> None:
    reports = check_all_mapping_conditions(linear_system, pair, 0.01, 0.01, 0.03)
    assert [r.condition for r in reports] == list(MAPPING_CONDITIONS)
    assert all(r.passed for r in reports), [r.to_json() for r in reports]
    assert all(r.n_base == 64 for r in reports)


def test_delta_past_the_chart_radius_is_refused(linear_system, pair) -> None:
    with pytest.raises(ChartOverflow):
        check_mapping_condition(linear_system, pair, "C6", 0.01, 0.01, 0.2)
    with pytest.raises(InvalidParameters, match="Delta1"):
        check_mapping_condition(linear_system, pair, "C6", 0.01, 0.01, 0.1)


@pytest.mark.parametrize(
    "cond, d1, d2, big",
    [
        ("C10", 0.01, 0.01, 0.03),
        ("C7", 0.0, 0.01, 0.03),
        ("C7", 0.01, 0.04, 0.03),
    ],
)
def test_bad_condition_arguments(linear_system, pair, cond, d1, d2, big) -> None:
    with pytest.raises(InvalidParameters):
        check_mapping_condition(linear_system, pair, cond, d1, d2, big)


def test_lewowicz_conditions_hold_at_small_rectangles(
    lewowicz_system, small_grid
) -> None:
    pair = LyapPair(frame=lewowicz_system.frame)
    reports = check_all_mapping_conditions(
        lewowicz_system, pair, 0.001, 0.001, 0.015, small_grid
    )
    failed = [r.condition for r in reports if not r.passed]
    assert not failed, [r.to_json() for r in reports]
    assert all(r.n_base == 16 + 25 for r in reports)
