from __future__ import annotations

import numpy as np
import pytest

from shadowtorus.errors import InvalidParameters
from shadowtorus.oracle import brute_force_shadow
from shadowtorus.orbits import displace_point, generate_pseudotrajectory
from shadowtorus.rect import LyapPair
from shadowtorus.shadow import shadow_finite, verify_shadowing
from shadowtorus.torus import chart_coords


def test_true_orbit_is_feasible(linear_system) -> None:
    ptraj = generate_pseudotrajectory(linear_system, [0.4, 0.2], 0.0, 3, seed=0)
    res = brute_force_shadow(linear_system, ptraj, 0.005, 0.005, 64)
    assert res.feasible
    assert res.violation < 0
    assert res.spacing == pytest.approx((0.01 / 64, 0.01 / 64))
    # The best centre sits in the cells next to the origin.
    assert abs(res.chart[1]) == pytest.approx(0.5 * res.spacing[1])


def test_oracle_agrees_with_the_solver(
    linear_system, linear_chain, small_grid
) -> None:
    chain = linear_chain
    d1, d2 = chain.delta1, chain.delta2
    ptraj = generate_pseudotrajectory(
        linear_system, [0.7, 0.45], 0.05 * chain.d, 3, seed=13
    )
    oracle = brute_force_shadow(linear_system, ptraj, d1, d2, 128)
    assert oracle.feasible
    assert verify_shadowing(linear_system, ptraj, oracle.point, chain.eps) is None

    res = shadow_finite(
        linear_system,
        LyapPair(frame=linear_system.frame),
        ptraj,
        d1,
        d2,
        grid=small_grid,
    )
    solver_v = chart_coords(linear_system.frame, ptraj.points[0], res.point)[1]
    # Feasible starts form a v-interval of width at most 2 d1 / beta^3.
    width = 2.0 * d1 * linear_system.beta**-3
    assert abs(float(solver_v) - oracle.chart[1]) <= width + oracle.spacing[1]


def test_kicked_trajectory_is_infeasible(linear_system) -> None:
    d1 = d2 = 0.005
    ptraj = generate_pseudotrajectory(linear_system, [0.15, 0.85], 0.0, 3, seed=0)
    kick = 2.0 * (linear_system.beta - 1.0) * d1
    bad = displace_point(ptraj, linear_system.frame, 2, np.array([0.0, kick]))
    res = brute_force_shadow(linear_system, bad, d1, d2, 128)
    assert not res.feasible
    assert res.violation > 0


@pytest.mark.parametrize(
    "m, grid_n, d1",
    [(9, 16, 0.005), (3, 0, 0.005), (3, 513, 0.005), (3, 16, 0.0)],
)
def test_oracle_rejects_bad_arguments(linear_system, m, grid_n, d1) -> None:
    ptraj = generate_pseudotrajectory(linear_system, [0.1, 0.1], 0.0, m, seed=0)
    with pytest.raises(InvalidParameters):
        brute_force_shadow(linear_system, ptraj, d1, 0.005, grid_n)
