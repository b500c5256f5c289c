from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from shadowtorus.types import ConditionReport

QUANTILES = [50, 90, 99]

SUMMARY_COLUMNS = [
    "run",
    "task",
    "status",
    "min_margin",
    "d",
    "trials",
    "shadow_success_rate",
    "achieved_eps_p50",
    "achieved_eps_p90",
    "achieved_eps_p99",
    "defect_id",
    "defect_conj",
]


def _percentiles(values: Sequence[float], ps: list[int]) -> dict[str, float | None]:
    """Linear-interpolated percentiles keyed p50, p90, ...; None for no values."""

    if not values:
        return {f"p{p}": None for p in ps}
    qs = np.percentile(np.asarray(values, dtype=float), ps, method="linear")
    return {f"p{p}": float(q) for p, q in zip(ps, qs)}


def min_margin(reports: Sequence[ConditionReport]) -> float | None:
    if not reports:
        return None
    return min(r.min_margin for r in reports)


def aggregate_trials(rows: Sequence[dict[str, Any]]) -> dict[str, Any]:
    """Success rate and achieved-eps quantiles over shadowing trials."""

    ok = [r for r in rows if r.get("shadowed")]
    achieved = [float(r["achieved_eps"]) for r in ok]
    return {
        "trials": len(rows),
        "shadowed": len(ok),
        "success_rate": (len(ok) / len(rows)) if rows else None,
        "achieved_eps": _percentiles(achieved, QUANTILES),
    }


def summary_row(run: str, manifest: dict[str, Any]) -> dict[str, Any]:
    """Flatten one run manifest into a SUMMARY_COLUMNS row; absent fields are None."""

    s = manifest.get("summary") or {}
    quantiles = s.get("achieved_eps") or {}
    row: dict[str, Any] = {c: None for c in SUMMARY_COLUMNS}
    row.update(
        {
            "run": run,
            "task": manifest.get("task"),
            "status": manifest.get("status"),
            "min_margin": s.get("min_margin"),
            "d": s.get("d"),
            "trials": s.get("trials"),
            "shadow_success_rate": s.get("success_rate"),
            "defect_id": s.get("defect_id"),
            "defect_conj": s.get("defect_conj"),
        }
    )
    for p in QUANTILES:
        row[f"achieved_eps_p{p}"] = quantiles.get(f"p{p}")
    return row
