from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from shadowtorus.errors import ConfigError
from shadowtorus.frame import CAT_MATRIX, EigenFrame, make_frame
from shadowtorus.profiles import LewowiczProfile, PiecewiseProfile


class Variant(str, Enum):
    LINEAR = "linear"
    LEWOWICZ_SMOOTH = "lewowicz_smooth"
    PIECEWISE_HOMEO = "piecewise_homeo"
    PERTURBED = "perturbed"

    @staticmethod
    def parse(raw: Any) -> "Variant":
        key = str(raw).strip().lower().replace("-", "_")
        aliases = {
            "lewowiczsmooth": "lewowicz_smooth",
            "piecewisehomeo": "piecewise_homeo",
        }
        key = aliases.get(key, key)
        try:
            return Variant(key)
        except ValueError:
            allowed = ", ".join(v.value for v in Variant)
            raise ConfigError(
                f"unknown variant {raw!r} (expected one of {allowed})",
                field="variant",
            ) from None


DEFAULT_LIP_LAMBDA = 0.5


@dataclass(frozen=True, eq=False)
class DisplacementField:
    """Smooth periodic field made of a few Fourier modes.

    phi(x) = amplitude * sum_j c_j sin(2 pi k_j.x + theta_j) e_j / sum_j |c_j|, so
    |phi| <= amplitude and Lip(phi) <= 2 pi amplitude sum_j |c_j||k_j| / sum_j |c_j|.
    """

    amplitude: float
    wavevectors: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]
    phases: tuple[float, ...]
    directions: tuple[tuple[float, float], ...]

    @property
    def lipschitz_per_amplitude(self) -> float:
        if not self.weights:
            return 0.0
        c = np.abs(np.asarray(self.weights, dtype=float))
        k = np.linalg.norm(np.asarray(self.wavevectors, dtype=float), axis=1)
        return float(2.0 * math.pi * np.sum(c * k) / np.sum(c))

    @property
    def lipschitz(self) -> float:
        return float(self.amplitude) * self.lipschitz_per_amplitude

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0.0 or not self.weights

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float)
        if self.is_zero:
            return np.zeros_like(x)
        k = np.asarray(self.wavevectors, dtype=float)
        c = np.asarray(self.weights, dtype=float)
        theta = np.asarray(self.phases, dtype=float)
        dirs = np.asarray(self.directions, dtype=float)
        arg = 2.0 * math.pi * (x @ k.T) + theta
        coeff = np.sin(arg) * (c / np.sum(np.abs(c)))
        return float(self.amplitude) * (coeff @ dirs)

    def to_json(self) -> dict[str, Any]:
        return {
            "amplitude": self.amplitude,
            "wavevectors": [list(k) for k in self.wavevectors],
            "weights": list(self.weights),
            "phases": list(self.phases),
            "directions": [list(d) for d in self.directions],
        }

    @staticmethod
    def from_json(obj: dict[str, Any]) -> "DisplacementField":
        try:
            return DisplacementField(
                amplitude=float(obj["amplitude"]),
                wavevectors=tuple(
                    (int(k[0]), int(k[1])) for k in obj.get("wavevectors", [])
                ),
                weights=tuple(float(c) for c in obj.get("weights", [])),
                phases=tuple(float(t) for t in obj.get("phases", [])),
                directions=tuple(
                    (float(d[0]), float(d[1])) for d in obj.get("directions", [])
                ),
            )
        except KeyError as e:
            raise ConfigError("missing key", field=f"field.{e.args[0]}") from None


@dataclass(frozen=True, eq=False)
class SystemSpec:
    variant: Variant
    frame: EigenFrame
    r: float = 0.0
    lewowicz: LewowiczProfile | None = None
    piecewise: PiecewiseProfile | None = None
    base: "SystemSpec | None" = None
    field: DisplacementField | None = None
    seed: int = 0

    @property
    def alpha(self) -> float:
        return self.frame.alpha

    @property
    def beta(self) -> float:
        return self.frame.beta

    def profile_json(self) -> dict[str, Any]:
        if self.lewowicz is not None:
            return self.lewowicz.to_json()
        if self.piecewise is not None:
            return self.piecewise.to_json()
        return {}

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "variant": self.variant.value,
            "matrix": [list(row) for row in self.frame.matrix],
            "r": self.r,
            "profile": self.profile_json(),
            "seed": self.seed,
        }
        if self.variant is Variant.PERTURBED:
            assert self.base is not None and self.field is not None
            out["perturbation"] = {
                "base": self.base.to_json(),
                "field": self.field.to_json(),
            }
        return out

    @staticmethod
    def from_json(obj: dict[str, Any]) -> "SystemSpec":
        if not isinstance(obj, dict):
            raise ConfigError("system block must be an object", field="system")
        if "variant" not in obj:
            raise ConfigError("missing required key", field="variant")
        variant = Variant.parse(obj["variant"])
        seed = int(obj.get("seed", 0))

        if variant is Variant.PERTURBED:
            pert = obj.get("perturbation")
            if not isinstance(pert, dict) or "base" not in pert:
                raise ConfigError("missing required key", field="perturbation.base")
            if "field" not in pert:
                raise ConfigError("missing required key", field="perturbation.field")
            base = SystemSpec.from_json(pert["base"])
            return SystemSpec(
                variant=variant,
                frame=base.frame,
                r=base.r,
                base=base,
                field=DisplacementField.from_json(pert["field"]),
                seed=seed,
            )

        frame = make_frame(obj.get("matrix", CAT_MATRIX))
        r = float(obj.get("r", 0.0))
        profile = obj.get("profile") or {}
        if not isinstance(profile, dict):
            raise ConfigError("profile must be an object", field="profile")

        lew: LewowiczProfile | None = None
        pw: PiecewiseProfile | None = None
        if variant is Variant.LEWOWICZ_SMOOTH:
            lew = lewowicz_profile_from_json(profile, r=r, alpha=frame.alpha)
        elif variant is Variant.PIECEWISE_HOMEO:
            pw = piecewise_profile_from_json(
                profile, r=r, alpha=frame.alpha, beta=frame.beta
            )

        return SystemSpec(
            variant=variant,
            frame=frame,
            r=r,
            lewowicz=lew,
            piecewise=pw,
            seed=seed,
        )


def lewowicz_profile_from_json(
    obj: dict[str, Any], *, r: float, alpha: float
) -> LewowiczProfile:
    return LewowiczProfile(
        r=r,
        alpha=alpha,
        h_skew=float(obj.get("h_skew", 0.0)),
        mu_power=int(obj.get("mu_power", 3)),
    )


def piecewise_profile_from_json(
    obj: dict[str, Any], *, r: float, alpha: float, beta: float
) -> PiecewiseProfile:
    lip = float(obj.get("lip_lambda", DEFAULT_LIP_LAMBDA))
    if "knots1" not in obj and "knots2" not in obj:
        return PiecewiseProfile.default(r=r, alpha=alpha, beta=beta, lip_lambda=lip)
    for key in ("knots1", "values1", "knots2", "values2"):
        if key not in obj:
            raise ConfigError("breakpoint lists must be given together", field=key)
    return PiecewiseProfile(
        r=r,
        alpha=alpha,
        beta=beta,
        lip_lambda=lip,
        knots1=tuple(float(x) for x in obj["knots1"]),
        values1=tuple(float(x) for x in obj["values1"]),
        knots2=tuple(float(x) for x in obj["knots2"]),
        values2=tuple(float(x) for x in obj["values2"]),
    )
