from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class ConditionReport:
    condition: str  # "C1".."C9", "C2-C4" or "W-pair"
    params: dict[str, float]
    passed: bool
    min_margin: float
    witness: dict[str, list[float]]
    n_base: int
    n_samples: int
    details: dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def from_margin(
        condition: str,
        params: dict[str, float],
        min_margin: float,
        *,
        witness: dict[str, list[float]] | None = None,
        n_base: int = 1,
        n_samples: int = 0,
        details: dict[str, Any] | None = None,
    ) -> "ConditionReport":
        return ConditionReport(
            condition=condition,
            params=dict(params),
            passed=bool(min_margin > 0.0),
            min_margin=float(min_margin),
            witness=dict(witness or {}),
            n_base=int(n_base),
            n_samples=int(n_samples),
            details=dict(details or {}),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "condition": self.condition,
            "params": dict(self.params),
            "passed": self.passed,
            "min_margin": self.min_margin,
            "witness": dict(self.witness),
            "n_base": self.n_base,
            "n_samples": self.n_samples,
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class ParameterChain:
    eps: float
    Delta0: float
    Delta: float
    delta1: float
    delta2: float
    d: float
    reports: tuple[ConditionReport, ...]
    candidates_tried: int

    @property
    def delta(self) -> float:
        return min(self.delta1, self.delta2)

    def to_json(self) -> dict[str, Any]:
        return {
            "eps": self.eps,
            "Delta0": self.Delta0,
            "Delta": self.Delta,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "d": self.d,
            "candidates_tried": self.candidates_tried,
            "reports": [r.to_json() for r in self.reports],
        }


@dataclass(frozen=True)
class ChartBox:
    """Axis-aligned box in eigen-chart coordinates about ``base``."""

    base: tuple[float, float]
    w_lo: float
    w_hi: float
    v_lo: float
    v_hi: float

    @staticmethod
    def from_bounds(base: Any, lo: Any, hi: Any) -> "ChartBox":
        return ChartBox(
            base=(float(base[0]), float(base[1])),
            w_lo=float(lo[0]),
            w_hi=float(hi[0]),
            v_lo=float(lo[1]),
            v_hi=float(hi[1]),
        )

    def contains(self, wv: Any, tol: float = 0.0) -> bool:
        w, v = float(wv[0]), float(wv[1])
        return (
            self.w_lo - tol <= w <= self.w_hi + tol
            and self.v_lo - tol <= v <= self.v_hi + tol
        )

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.w_lo + self.w_hi), 0.5 * (self.v_lo + self.v_hi))

    @property
    def half_widths(self) -> tuple[float, float]:
        return (0.5 * (self.w_hi - self.w_lo), 0.5 * (self.v_hi - self.v_lo))

    def to_json(self) -> dict[str, Any]:
        return {
            "base": list(self.base),
            "w": [self.w_lo, self.w_hi],
            "v": [self.v_lo, self.v_hi],
        }


@dataclass(frozen=True)
class ShadowViolation:
    step: int
    distance: float
    kind: str = "distance"  # or "junction"


@dataclass(frozen=True, eq=False)
class ShadowResult:
    point: tuple[float, float]
    achieved_eps: float
    per_step: tuple[float, ...]
    orbit: tuple[tuple[float, float], ...]
    certificate: dict[str, Any]
    boxes: tuple[ChartBox, ...] = ()

    @property
    def m(self) -> int:
        return len(self.per_step) - 1

    def to_json(self) -> dict[str, Any]:
        return {
            "r": list(self.point),
            "achieved_eps": self.achieved_eps,
            "per_step": list(self.per_step),
            "certificate": dict(self.certificate),
            "boxes": [b.to_json() for b in self.boxes],
        }


@dataclass(frozen=True)
class LipschitzCheck:
    bound: float
    max_quotient: float
    n_samples: int
    passed: bool


@dataclass(frozen=True)
class OracleResult:
    point: tuple[float, float]
    chart: tuple[float, float]  # (w, v) about p0
    feasible: bool
    violation: float
    spacing: tuple[float, float]  # cell widths in w and v


@dataclass(frozen=True)
class ExpansivityEstimate:
    K: int
    n_pairs: int
    a_est: float
    min_separation: float
    histogram: tuple[int, ...]  # pairs first exceeding a_est at |k| = 0..K

    def to_json(self) -> dict[str, Any]:
        return {
            "K": self.K,
            "n_pairs": self.n_pairs,
            "a_est": self.a_est,
            "min_separation": self.min_separation,
            "histogram": list(self.histogram),
        }


@dataclass(frozen=True, eq=False)
class ConjugacySample:
    grid_n: int
    points: tuple[tuple[float, float], ...]
    h_values: tuple[tuple[float, float], ...]
    achieved_eps: tuple[float, ...]
    defect_conj: float
    defect_id: float
    # dist(h(p), p) and dist(f(h(p)), h(g(p))) at every grid point
    point_defect_id: tuple[float, ...] = ()
    point_defect_conj: tuple[float, ...] = ()


@dataclass(frozen=True)
class ConjugacyDefect:
    defect_conj: float
    defect_id: float
    conj_witness: tuple[float, float]
    id_witness: tuple[float, float]
    interpolation_bound: float
    point_defect_id: tuple[float, ...] = ()
    point_defect_conj: tuple[float, ...] = ()


@dataclass(frozen=True)
class StabilityReport:
    rho: float
    rho_bound: float
    K: int
    eps: float
    chain: ParameterChain
    defect_conj: float
    defect_id: float
    interpolation_bound: float
    box_width: float
    n_points: int
    achieved_eps_max: float
    certificates: tuple[dict[str, Any], ...]

    def to_json(self) -> dict[str, Any]:
        return {
            "rho": self.rho,
            "rho_bound": self.rho_bound,
            "K": self.K,
            "eps": self.eps,
            "chain": {
                "Delta0": self.chain.Delta0,
                "Delta": self.chain.Delta,
                "delta1": self.chain.delta1,
                "delta2": self.chain.delta2,
                "d": self.chain.d,
            },
            "defect_conj": self.defect_conj,
            "defect_id": self.defect_id,
            "interpolation_bound": self.interpolation_bound,
            "box_width": self.box_width,
            "n_points": self.n_points,
            "achieved_eps_max": self.achieved_eps_max,
            "certificates": [dict(c) for c in self.certificates],
        }
