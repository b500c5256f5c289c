from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from shadowtorus.orbits import Pseudotrajectory
from shadowtorus.types import ConditionReport, ConjugacySample


def write_json(path: Path, obj: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True), encoding="utf-8")


def read_json(path: Path) -> dict[str, Any]:
    return json.loads(path.read_text(encoding="utf-8"))


def write_pseudotrajectory_csv(path: Path, ptraj: Pseudotrajectory) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["k", "x", "y"])
        for k, (x, y) in enumerate(ptraj.points):
            w.writerow([k, float(x), float(y)])


def read_pseudotrajectory_csv(path: Path, nominal_d: float) -> Pseudotrajectory:
    with path.open("r", newline="", encoding="utf-8") as f:
        rows = sorted(csv.DictReader(f), key=lambda r: int(r["k"]))
    pts = np.array([[float(r["x"]), float(r["y"])] for r in rows]).reshape(-1, 2)
    return Pseudotrajectory.from_points(pts, nominal_d)


def write_conditions_csv(path: Path, reports: Sequence[ConditionReport]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(
            [
                "condition",
                "passed",
                "min_margin",
                "delta1",
                "delta2",
                "Delta",
                "n_base",
                "n_samples",
            ]
        )
        for r in reports:
            w.writerow(
                [
                    r.condition,
                    int(r.passed),
                    r.min_margin,
                    r.params.get("delta1", ""),
                    r.params.get("delta2", ""),
                    r.params.get("Delta", ""),
                    r.n_base,
                    r.n_samples,
                ]
            )


TRIAL_COLUMNS = [
    "trial",
    "seed",
    "shadowed",
    "achieved_eps",
    "failing_step",
    "failure_reason",
    "windows",
    "max_terminal_width",
]


def write_trials_csv(path: Path, rows: Sequence[dict[str, Any]]) -> None:
    write_table_csv(path, TRIAL_COLUMNS, rows)


CONJUGACY_COLUMNS = [
    "i",
    "x",
    "y",
    "hx",
    "hy",
    "achieved_eps",
    "defect_id",
    "defect_conj",
]

DISTANCE_COLUMNS = ["trial", "k", "distance"]


def _at(values: Sequence[float], i: int) -> float | str:
    return values[i] if i < len(values) else ""


def write_distances_csv(path: Path, rows: Sequence[dict[str, Any]]) -> None:
    write_table_csv(path, DISTANCE_COLUMNS, rows)


def write_conjugacy_csv(path: Path, sample: ConjugacySample) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(CONJUGACY_COLUMNS)
        for i, ((x, y), (hx, hy), a) in enumerate(
            zip(sample.points, sample.h_values, sample.achieved_eps)
        ):
            d_id = _at(sample.point_defect_id, i)
            d_conj = _at(sample.point_defect_conj, i)
            w.writerow([i, x, y, hx, hy, a, d_id, d_conj])


def write_table_csv(
    path: Path, columns: Sequence[str], rows: Sequence[dict[str, Any]]
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(list(columns))
        for row in rows:
            w.writerow([_cell(row.get(c)) for c in columns])


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return int(value)
    return value
