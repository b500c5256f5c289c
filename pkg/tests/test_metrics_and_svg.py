from __future__ import annotations

import numpy as np
import pytest

from shadowtorus.frame import make_frame
from shadowtorus.metrics import (
    SUMMARY_COLUMNS,
    _percentiles,
    aggregate_trials,
    min_margin,
    summary_row,
)
from shadowtorus.svg import SIZE, rect_outline, render_overlay, wrapped_segments
from shadowtorus.types import ConditionReport


def test_percentiles_interpolate_between_ranks() -> None:
    assert _percentiles([], [50, 90]) == {"p50": None, "p90": None}
    assert _percentiles([3.0, 1.0, 2.0], [0, 50, 100]) == {
        "p0": 1.0,
        "p50": 2.0,
        "p100": 3.0,
    }
    assert _percentiles([0.0, 10.0], [90])["p90"] == pytest.approx(9.0)
    assert _percentiles([4.0], [50, 99]) == {"p50": 4.0, "p99": 4.0}


def test_aggregate_trials_counts_only_shadowed_rows() -> None:
    rows = [
        {"trial": 0, "shadowed": True, "achieved_eps": 0.01},
        {"trial": 1, "shadowed": True, "achieved_eps": 0.03},
        {"trial": 2, "shadowed": False, "failing_step": 4},
    ]
    agg = aggregate_trials(rows)
    assert agg["trials"] == 3 and agg["shadowed"] == 2
    assert agg["success_rate"] == pytest.approx(2 / 3)
    assert agg["achieved_eps"]["p50"] == pytest.approx(0.02)
    assert aggregate_trials([])["success_rate"] is None


def test_min_margin_over_reports() -> None:
    reports = [
        ConditionReport.from_margin("C5", {}, 0.2),
        ConditionReport.from_margin("C6", {}, -0.1),
    ]
    assert min_margin(reports) == -0.1
    assert min_margin([]) is None


def test_summary_row_flattens_a_manifest() -> None:
    manifest = {
        "task": "shadow",
        "status": "pass",
        "summary": {
            "trials": 4,
            "success_rate": 1.0,
            "d": 1e-3,
            "achieved_eps": {"p50": 0.01, "p90": 0.02, "p99": 0.03},
        },
    }
    row = summary_row("shadow", manifest)
    assert list(row) == SUMMARY_COLUMNS
    assert row["shadow_success_rate"] == 1.0
    assert row["achieved_eps_p99"] == 0.03
    assert row["defect_id"] is None

    bare = summary_row("x", {"task": "report"})
    assert bare["status"] is None and bare["achieved_eps_p50"] is None


def test_wrapped_segments_split_at_torus_jumps() -> None:
    pts = np.array([[0.1, 0.1], [0.2, 0.2], [0.95, 0.2], [0.9, 0.3], [0.1, 0.9]])
    segs = wrapped_segments(pts)
    assert [s.shape[0] for s in segs] == [2, 2, 1]
    assert wrapped_segments(np.empty((0, 2))) == []


def test_rect_outline_repeats_across_edges() -> None:
    frame = make_frame()
    inside = rect_outline(frame, np.array([0.5, 0.5]), 0.01, 0.01)
    assert inside.count("<polygon") == 1
    edge = rect_outline(frame, np.array([0.001, 0.5]), 0.01, 0.01)
    assert edge.count("<polygon") == 9


def test_render_overlay_draws_every_layer() -> None:
    frame = make_frame()
    pseudo = np.array([[0.1, 0.1], [0.3, 0.4], [0.9, 0.9]])
    shadow = pseudo + 1e-3
    text = render_overlay(frame, pseudo, shadow, [(pseudo[1], 0.01, 0.02)])
    assert text.startswith("<?xml")
    assert text.rstrip().endswith("</svg>")
    assert f'width="{SIZE}"' in text
    assert text.count("<circle") == 3
    # One pseudo-orbit and one shadow polyline per wrap-free run.
    assert text.count("<polyline") == 4
    assert text.count("<polygon") == 1
