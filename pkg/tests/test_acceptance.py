"""Acceptance-scale runs; deselect with -m 'not slow'."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from shadowtorus.errors import Exhausted
from shadowtorus.oracle import brute_force_shadow
from shadowtorus.orbits import generate_pseudotrajectory
from shadowtorus.rect import LyapPair
from shadowtorus.seeding import seed_for_item
from shadowtorus.shadow import shadow_finite, verify_shadow_orbit, verify_shadowing
from shadowtorus.stability import build_semiconjugacy, estimate_expansivity
from shadowtorus.systems import horizontal_contraction_samples, make_perturbation
from shadowtorus.torus import chart_coords
from shadowtorus.wazewski import derive_parameter_chain

pytestmark = pytest.mark.slow

EPS = 0.05


@pytest.fixture(scope="module")
def lewowicz_chain(lewowicz_system):
    pair = LyapPair(frame=lewowicz_system.frame)
    return derive_parameter_chain(lewowicz_system, pair, EPS)


def test_horizontal_estimate_over_many_samples(lewowicz_system) -> None:
    q = horizontal_contraction_samples(lewowicz_system, lewowicz_system.r, 100_000, 1)
    assert np.all(q < 1.0 + 1e-9)


def test_lewowicz_pseudotrajectories_are_shadowed(
    lewowicz_system, lewowicz_chain
) -> None:
    chain = lewowicz_chain
    pair = LyapPair(frame=lewowicz_system.frame)
    for i in range(100):
        seed = seed_for_item(2024, i)
        p0 = np.random.default_rng(seed).random(2)
        ptraj = generate_pseudotrajectory(lewowicz_system, p0, chain.d, 200, seed)
        res = shadow_finite(lewowicz_system, pair, ptraj, chain.delta1, chain.delta2)
        assert res.achieved_eps < EPS, i
        assert verify_shadow_orbit(lewowicz_system, ptraj, res.orbit, EPS) is None


@pytest.mark.parametrize("fixture", ["linear_system", "lewowicz_system"])
def test_oracle_equivalence_on_short_instances(
    request, fixture: str, small_grid
) -> None:
    sys = request.getfixturevalue(fixture)
    pair = LyapPair(frame=sys.frame)
    d1 = d2 = 0.01
    grid_n = 512
    rng = np.random.default_rng(77)
    seen = {True: 0, False: 0}
    for i in range(50):
        m = int(rng.integers(1, 6))
        d = float(rng.uniform(1e-3, 3e-2))
        p0 = rng.random(2)
        ptraj = generate_pseudotrajectory(sys, p0, d, m, seed=i)

        oracle = brute_force_shadow(sys, ptraj, d1, d2, grid_n)
        try:
            res = shadow_finite(sys, pair, ptraj, d1, d2, grid=small_grid)
        except Exhausted:
            res = None

        # A half-cell offset at step 0 grows to beta^m / grid_n in the violation.
        if abs(oracle.violation) <= 2.0 * sys.beta**m / grid_n:
            continue
        assert (res is not None) == oracle.feasible, (i, m, d, oracle.violation)
        seen[oracle.feasible] += 1
        if res is None:
            continue

        assert verify_shadowing(sys, ptraj, res.point, 1.5 * d1) is None, i
        solver_v = float(chart_coords(sys.frame, ptraj.points[0], res.point)[1])
        width = 2.0 * d1 * sys.beta ** (-m)
        assert abs(solver_v - oracle.chart[1]) <= width + oracle.spacing[1], i
    assert seen[True] > 0 and seen[False] > 0, seen


def test_expansivity_is_positive_and_stable(lewowicz_system) -> None:
    a = estimate_expansivity(lewowicz_system, K=40, n_pairs=10_000, seed=3)
    b = estimate_expansivity(lewowicz_system, K=40, n_pairs=20_000, seed=3)
    assert a.a_est > 0 and b.a_est > 0
    assert 0.8 <= b.a_est / a.a_est <= 1.2


def test_semiconjugacy_on_a_full_grid(lewowicz_system, lewowicz_chain) -> None:
    g = make_perturbation(lewowicz_system, {"sup_norm": 0.5 * lewowicz_chain.d}, 9)
    sample, report = build_semiconjugacy(
        lewowicz_system, g, EPS, 32, K=25, chain=lewowicz_chain
    )
    assert report.n_points == 32 * 32
    assert report.defect_id < EPS
    limit = EPS + report.box_width + report.interpolation_bound
    assert report.defect_conj < limit
    assert max(sample.achieved_eps) < EPS


def test_stability_reports_are_byte_identical(tmp_path: Path) -> None:
    from shadowtorus.cli import main

    cfg = tmp_path / "stability.json"
    cfg.write_text(
        json.dumps(
            {
                "task": "stability",
                "seed": 11,
                "system": {"variant": "lewowicz_smooth", "r": 0.05},
                "params": {
                    "grid_n": 4,
                    "K": 10,
                    "expansivity_K": 20,
                    "expansivity_pairs": 500,
                    "monotone_pairs": 200,
                },
            }
        ),
        encoding="utf-8",
    )
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["stability", "--config", str(cfg), "--out", str(out)]) == 0
    for name in ("stability.json", "conjugacy.csv", "manifest.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name
