from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol

import numpy as np

from shadowtorus.conditions import (
    check_all_mapping_conditions,
    check_C1,
    check_retraction_axioms,
)
from shadowtorus.config import ExperimentConfig
from shadowtorus.errors import (
    ChainFailed,
    Exhausted,
    MissingArtifacts,
    PreconditionRho,
    ShadowFailed,
)
from shadowtorus.io import (
    read_json,
    write_conditions_csv,
    write_conjugacy_csv,
    write_distances_csv,
    write_json,
    write_pseudotrajectory_csv,
    write_table_csv,
    write_trials_csv,
)
from shadowtorus.metrics import (
    SUMMARY_COLUMNS,
    aggregate_trials,
    min_margin,
    summary_row,
)
from shadowtorus.model import SystemSpec
from shadowtorus.orbits import (
    displace_point,
    generate_pseudotrajectory,
    is_pseudotrajectory,
    step_defects,
)
from shadowtorus.rect import LyapPair
from shadowtorus.seeding import seed_for_item
from shadowtorus.shadow import shadow_finite, verify_shadow_orbit
from shadowtorus.stability import (
    build_semiconjugacy,
    estimate_expansivity,
    monotone_along_orbits,
)
from shadowtorus.svg import render_overlay, write_svg
from shadowtorus.systems import make_perturbation
from shadowtorus.types import ParameterChain
from shadowtorus.wazewski import derive_parameter_chain

logger = logging.getLogger(__name__)

RECT_OVERLAY_STEPS = 5


@dataclass(frozen=True)
class TaskOutcome:
    passed: bool
    artifacts: tuple[str, ...]
    summary: dict[str, Any] = field(default_factory=dict)


class TaskRunner(Protocol):
    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        raise NotImplementedError


def _system(config: ExperimentConfig) -> SystemSpec:
    assert config.system is not None
    return config.system


def _chain_or_failure(
    config: ExperimentConfig, out_dir: Path, eps: float
) -> ParameterChain | TaskOutcome:
    sys = _system(config)
    try:
        return derive_parameter_chain(sys, LyapPair(frame=sys.frame), eps, config.grid)
    except ChainFailed as e:
        logger.warning("parameter chain failed at %s: %s", e.condition, e)
        write_json(
            out_dir / "chain.json",
            {"failed": True, "condition": e.condition, "message": str(e)},
        )
        return TaskOutcome(
            passed=False,
            artifacts=("chain.json",),
            summary={"failed_condition": e.condition},
        )


@dataclass(frozen=True)
class SimulateTask:
    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        sys = _system(config)
        p = config.params
        ptraj = generate_pseudotrajectory(
            sys, np.asarray(p["p0"]), p["d"], p["m"], seed_for_item(config.seed, 0)
        )
        write_pseudotrajectory_csv(out_dir / "pseudotrajectory.csv", ptraj)
        artifacts = ["pseudotrajectory.csv"]
        if config.emit_svg:
            write_svg(
                out_dir / "pseudotrajectory.svg",
                render_overlay(sys.frame, ptraj.points),
            )
            artifacts.append("pseudotrajectory.svg")

        bad = is_pseudotrajectory(sys, ptraj, p["d"]) if p["d"] > 0 else None
        defects = step_defects(sys, ptraj)
        return TaskOutcome(
            passed=bad is None,
            artifacts=tuple(artifacts),
            summary={
                "m": ptraj.m,
                "d": p["d"],
                "max_step_defect": float(np.max(defects)) if defects.size else 0.0,
            },
        )


@dataclass(frozen=True)
class CheckConditionsTask:
    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        sys = _system(config)
        pair = LyapPair(frame=sys.frame)
        p = config.params
        d1, d2, big = p["delta1"], p["delta2"], p["Delta"]

        c1 = check_C1(sys, pair, p["eps"])
        retraction = check_retraction_axioms(
            d1, d2, big, seed=seed_for_item(config.seed, 0)
        )
        mapping = check_all_mapping_conditions(sys, pair, d1, d2, big, config.grid)
        reports = [c1, retraction, *mapping]

        write_json(
            out_dir / "conditions.json",
            {
                "C1": c1.to_json(),
                "retraction": retraction.to_json(),
                "mapping": [r.to_json() for r in mapping],
            },
        )
        write_conditions_csv(out_dir / "conditions.csv", reports)
        return TaskOutcome(
            passed=all(r.passed for r in reports),
            artifacts=("conditions.csv", "conditions.json"),
            summary={
                "min_margin": min_margin(mapping),
                "failed": [r.condition for r in reports if not r.passed],
            },
        )


@dataclass(frozen=True)
class DeriveChainTask:
    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        chain = _chain_or_failure(config, out_dir, config.params["eps"])
        if isinstance(chain, TaskOutcome):
            return chain
        write_json(out_dir / "chain.json", chain.to_json())
        write_conditions_csv(out_dir / "conditions.csv", chain.reports)
        return TaskOutcome(
            passed=True,
            artifacts=("chain.json", "conditions.csv"),
            summary={
                "min_margin": min_margin(chain.reports[1:]),
                "d": chain.d,
                "delta1": chain.delta1,
                "delta2": chain.delta2,
                "Delta": chain.Delta,
            },
        )


@dataclass(frozen=True)
class ShadowTask:
    """Shadow seeded pseudotrajectories of length m at the derived (delta1, delta2, d).

    With ``negative_control_step`` = k, p_{k+1} of every trial is pushed by
    2 (beta - 1) delta1 along the expanding direction and each trial must fail at k.
    """

    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        sys = _system(config)
        p = config.params
        chain = _chain_or_failure(config, out_dir, p["eps"])
        if isinstance(chain, TaskOutcome):
            return chain

        pair = LyapPair(frame=sys.frame)
        d = chain.d * p["d_fraction"]
        control = p["negative_control_step"]
        rows: list[dict[str, Any]] = []
        results: list[dict[str, Any]] = []
        distances: list[dict[str, Any]] = []
        first: tuple[np.ndarray, np.ndarray | None] | None = None

        for i in range(p["trials"]):
            seed = seed_for_item(config.seed, i)
            p0 = np.random.default_rng(seed).random(2)
            ptraj = generate_pseudotrajectory(sys, p0, d, p["m"], seed)
            if control is not None:
                kick = np.array([0.0, 2.0 * (sys.beta - 1.0) * chain.delta1])
                ptraj = displace_point(ptraj, sys.frame, control + 1, kick)

            row: dict[str, Any] = {"trial": i, "seed": seed, "shadowed": False}
            shadow_pts: np.ndarray | None = None
            try:
                res = shadow_finite(
                    sys,
                    pair,
                    ptraj,
                    chain.delta1,
                    chain.delta2,
                    config.solver,
                    grid=config.grid,
                )
            except Exhausted as e:
                row.update(failing_step=e.failing_step, failure_reason=e.reason)
                results.append({"trial": i, "exhausted": dict(e.certificate)})
            else:
                violation = verify_shadow_orbit(
                    sys, ptraj, res.orbit, p["eps"], config.solver.junction_tol
                )
                row.update(
                    shadowed=violation is None,
                    achieved_eps=res.achieved_eps,
                    windows=res.certificate["windows"],
                    max_terminal_width=res.certificate["max_terminal_width"],
                )
                if violation is not None:
                    row.update(
                        failing_step=violation.step, failure_reason=violation.kind
                    )
                results.append({"trial": i, **res.to_json()})
                distances.extend(
                    {"trial": i, "k": k, "distance": x}
                    for k, x in enumerate(res.per_step)
                )
                shadow_pts = np.asarray(res.orbit)
            rows.append(row)
            if first is None:
                first = (ptraj.points, shadow_pts)
            logger.info("shadow trial %d: %s", i, row.get("failure_reason", "ok"))

        write_trials_csv(out_dir / "trials.csv", rows)
        write_distances_csv(out_dir / "shadow_distances.csv", distances)
        write_json(
            out_dir / "shadow.json",
            {
                "chain": chain.to_json(),
                "d": d,
                "eps": p["eps"],
                "m": p["m"],
                "negative_control_step": control,
                "trials": results,
            },
        )
        artifacts = ["shadow.json", "shadow_distances.csv", "trials.csv"]
        if config.emit_svg and first is not None:
            pts, shadow_pts = first
            steps = np.linspace(0, p["m"], RECT_OVERLAY_STEPS).round().astype(int)
            rects = [(pts[k], chain.delta1, chain.delta2) for k in sorted(set(steps))]
            write_svg(
                out_dir / "shadow_trial0.svg",
                render_overlay(sys.frame, pts, shadow_pts, rects),
            )
            artifacts.append("shadow_trial0.svg")

        if control is None:
            passed = all(r["shadowed"] for r in rows)
        else:
            passed = all(r.get("failing_step") == control for r in rows)
        summary = aggregate_trials(rows)
        summary.update(d=d, min_margin=min_margin(chain.reports[1:]))
        return TaskOutcome(passed=passed, artifacts=tuple(artifacts), summary=summary)


@dataclass(frozen=True)
class StabilityTask:
    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        sys = _system(config)
        p = config.params
        eps = p["eps"]
        chain = _chain_or_failure(config, out_dir, eps)
        if isinstance(chain, TaskOutcome):
            return chain

        pair = LyapPair(frame=sys.frame)
        g = make_perturbation(
            sys,
            {"sup_norm": p["perturbation_fraction"] * chain.d},
            seed_for_item(config.seed, 0),
        )
        expansivity = estimate_expansivity(
            sys,
            p["expansivity_K"],
            p["expansivity_pairs"],
            seed_for_item(config.seed, 1),
        )
        monotone = monotone_along_orbits(
            sys,
            pair,
            p["monotone_pairs"],
            p["monotone_steps"],
            seed_for_item(config.seed, 2),
        )
        out: dict[str, Any] = {
            "perturbation": g.to_json(),
            "expansivity": expansivity.to_json(),
            "monotone_fraction": monotone,
        }
        try:
            sample, report = build_semiconjugacy(
                sys,
                g,
                eps,
                p["grid_n"],
                p["K"],
                chain=chain,
                grid=config.grid,
                solver=config.solver,
            )
        except (PreconditionRho, ShadowFailed) as e:
            logger.warning("stability run failed: %s", e)
            out.update(failed=True, error=type(e).__name__, message=str(e))
            write_json(out_dir / "stability.json", out)
            return TaskOutcome(
                passed=False,
                artifacts=("stability.json",),
                summary={"d": chain.d, "error": type(e).__name__},
            )

        out["report"] = report.to_json()
        write_json(out_dir / "stability.json", out)
        write_conjugacy_csv(out_dir / "conjugacy.csv", sample)
        conj_limit = eps + report.box_width + report.interpolation_bound
        passed = (
            report.defect_id < eps
            and report.defect_conj < conj_limit
            and expansivity.a_est > 0
        )
        return TaskOutcome(
            passed=passed,
            artifacts=("conjugacy.csv", "stability.json"),
            summary={
                "d": chain.d,
                "min_margin": min_margin(chain.reports[1:]),
                "defect_id": report.defect_id,
                "defect_conj": report.defect_conj,
                "conj_limit": conj_limit,
                "a_est": expansivity.a_est,
            },
        )


@dataclass(frozen=True)
class ReportTask:
    """One summary row per run manifest found below the run directory."""

    def run(self, *, config: ExperimentConfig, out_dir: Path) -> TaskOutcome:
        rows = []
        for path in sorted(out_dir.rglob("manifest.json")):
            manifest = read_json(path)
            if manifest.get("task") == "report":
                continue
            run = path.parent.relative_to(out_dir).as_posix()
            rows.append(summary_row(run, manifest))
        if not rows:
            raise MissingArtifacts(f"no run manifests found under {out_dir}")
        rows.sort(key=lambda r: r["run"])

        write_table_csv(out_dir / "summary.csv", SUMMARY_COLUMNS, rows)
        write_json(
            out_dir / "summary.json", {"columns": list(SUMMARY_COLUMNS), "rows": rows}
        )
        return TaskOutcome(
            passed=True,
            artifacts=("summary.csv", "summary.json"),
            summary={"runs": len(rows)},
        )


def runner_for_task(task: str) -> TaskRunner:
    """Select the runner for a task name."""

    if task == "simulate":
        return SimulateTask()
    if task == "check-conditions":
        return CheckConditionsTask()
    if task == "derive-chain":
        return DeriveChainTask()
    if task == "shadow":
        return ShadowTask()
    if task == "stability":
        return StabilityTask()
    if task == "report":
        return ReportTask()
    raise ValueError(f"Unsupported task: {task}")
