"""Perturbation profiles for the two nonhyperbolic torus maps.

Smooth profile: F(w, v) = (alpha*w + lam(w)*mu(v), beta*v) inside the support,
with lam(x) = int_0^x ((1 - alpha) - h(s)) ds.

Piecewise-linear profile: increasing mu1, mu2 with mu1 = alpha*x and
mu2 = beta*y beyond the support radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from numpy.polynomial import Polynomial


def _abs_max_on_unit(poly: Polynomial) -> float:
    crit = poly.deriv().roots()
    crit = crit[np.abs(crit.imag) < 1e-9].real
    cands = np.concatenate([[0.0, 1.0], crit[(crit >= 0.0) & (crit <= 1.0)]])
    return float(np.max(np.abs(poly(cands))))


def _range_on_unit(poly: Polynomial) -> tuple[float, float]:
    crit = poly.deriv().roots()
    crit = crit[np.abs(crit.imag) < 1e-9].real
    cands = np.concatenate([[0.0, 1.0], crit[(crit >= 0.0) & (crit <= 1.0)]])
    vals = poly(cands)
    return float(np.min(vals)), float(np.max(vals))


def tent(t: np.ndarray, r: float) -> np.ndarray:
    """Cutoff equal to 1 on |t| <= r/2 and 0 on |t| >= r, linear in between."""

    return np.clip(2.0 - 2.0 * np.abs(t) / r, 0.0, 1.0)


TENT_SLOPE_FACTOR = 2.0  # |tent'| <= 2/r


@dataclass(frozen=True, eq=False)
class LewowiczProfile:
    r: float
    alpha: float
    h_skew: float = 0.0
    mu_power: int = 3

    @cached_property
    def phi(self) -> Polynomial:
        # (1-t)^3 (1 + 3t + a t^2 + b t^3): phi(0)=1, phi'(0)=0, C^2 flat at t=1,
        # and a is fixed so that int_0^1 phi = 0.
        b = float(self.h_skew)
        a = -24.0 - 3.0 * b / 7.0
        return Polynomial([1.0, -1.0]) ** 3 * Polynomial([1.0, 3.0, a, b])

    @cached_property
    def big_phi(self) -> Polynomial:
        return self.phi.integ()

    @cached_property
    def mu_poly(self) -> Polynomial:
        return Polynomial([1.0, 0.0, -1.0]) ** int(self.mu_power)

    def _t(self, s: np.ndarray) -> np.ndarray:
        return np.minimum(np.abs(s) / self.r, 1.0)

    def h(self, s: np.ndarray) -> np.ndarray:
        return (1.0 - self.alpha) * (1.0 - self.phi(self._t(s)))

    def lam(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (1.0 - self.alpha) * np.sign(x) * self.r * self.big_phi(self._t(x))

    def lam_prime(self, x: np.ndarray) -> np.ndarray:
        return (1.0 - self.alpha) * self.phi(self._t(x))

    def mu(self, y: np.ndarray) -> np.ndarray:
        return self.mu_poly(self._t(y))

    def mu_prime(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.sign(y) * self.mu_poly.deriv()(self._t(y)) / self.r

    @cached_property
    def integral_residual(self) -> float:
        """|int_0^r ((1 - alpha) - h)|, zero by construction up to rounding."""

        return abs((1.0 - self.alpha) * self.r * float(self.big_phi(1.0)))

    @cached_property
    def h_range(self) -> tuple[float, float]:
        lo, hi = _range_on_unit(self.phi)
        return (1.0 - self.alpha) * (1.0 - hi), (1.0 - self.alpha) * (1.0 - lo)

    @cached_property
    def lam_max(self) -> float:
        return (1.0 - self.alpha) * self.r * _abs_max_on_unit(self.big_phi)

    @cached_property
    def mu_prime_max(self) -> float:
        return _abs_max_on_unit(self.mu_poly.deriv()) / self.r

    @cached_property
    def rate_range(self) -> tuple[float, float]:
        """Range of dF_w/dw = alpha + ((1 - alpha) - h(w)) mu(v) over the plane."""

        h_min, h_max = self.h_range
        return min(self.alpha, 1.0 - h_max), max(self.alpha, 1.0 - h_min)

    def to_json(self) -> dict[str, Any]:
        return {"h_skew": self.h_skew, "mu_power": self.mu_power}


@dataclass(frozen=True, eq=False)
class PiecewiseProfile:
    r: float
    alpha: float
    beta: float
    lip_lambda: float
    knots1: tuple[float, ...]
    values1: tuple[float, ...]
    knots2: tuple[float, ...]
    values2: tuple[float, ...]

    @staticmethod
    def default(
        *, r: float, alpha: float, beta: float, lip_lambda: float
    ) -> "PiecewiseProfile":
        # Slope lip_lambda on [-c1, c1] and the slope that lands on alpha*r outside;
        # likewise 1/lip_lambda on [-r/2, r/2] for mu2.
        lip = float(lip_lambda)
        c1 = r * alpha / (2.0 * lip) if lip > 0 else r
        c2 = 0.5 * r
        inv = 1.0 / lip if lip > 0 else float("inf")
        return PiecewiseProfile(
            r=r,
            alpha=alpha,
            beta=beta,
            lip_lambda=lip,
            knots1=(-r, -c1, 0.0, c1, r),
            values1=(-alpha * r, -lip * c1, 0.0, lip * c1, alpha * r),
            knots2=(-r, -c2, 0.0, c2, r),
            values2=(-beta * r, -c2 * inv, 0.0, c2 * inv, beta * r),
        )

    @staticmethod
    def slopes(knots: tuple[float, ...], values: tuple[float, ...]) -> np.ndarray:
        return np.diff(np.asarray(values)) / np.diff(np.asarray(knots))

    @cached_property
    def slopes1(self) -> np.ndarray:
        return self.slopes(self.knots1, self.values1)

    @cached_property
    def slopes2(self) -> np.ndarray:
        return self.slopes(self.knots2, self.values2)

    def mu1(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inner = np.interp(x, self.knots1, self.values1)
        return np.where(np.abs(x) < self.r, inner, self.alpha * x)

    def mu2(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        inner = np.interp(y, self.knots2, self.values2)
        return np.where(np.abs(y) < self.r, inner, self.beta * y)

    @cached_property
    def dev1_max(self) -> float:
        """sup |mu1(x) - alpha*x| (attained at a knot)."""

        k = np.asarray(self.knots1)
        return float(np.max(np.abs(np.asarray(self.values1) - self.alpha * k)))

    @cached_property
    def dev2_max(self) -> float:
        k = np.asarray(self.knots2)
        return float(np.max(np.abs(np.asarray(self.values2) - self.beta * k)))

    def to_json(self) -> dict[str, Any]:
        return {
            "lip_lambda": self.lip_lambda,
            "knots1": list(self.knots1),
            "values1": list(self.values1),
            "knots2": list(self.knots2),
            "values2": list(self.values2),
        }
