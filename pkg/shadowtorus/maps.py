"""Concrete torus maps behind each system variant.

Every map works on arrays of standard coordinates of shape (..., 2). Nonlinear
variants act through the eigen-chart about the fixed point at the origin and equal
the automorphism A outside the chart square of half-width r.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from shadowtorus.errors import NonConvergence, NotDifferentiable
from shadowtorus.frame import EigenFrame
from shadowtorus.model import DisplacementField
from shadowtorus.profiles import (
    TENT_SLOPE_FACTOR,
    LewowiczProfile,
    PiecewiseProfile,
    tent,
)
from shadowtorus.torus import origin_chart_coords, reduce_mod1

BISECTION_STEPS = 64
FIXED_POINT_TOL = 1e-12
FIXED_POINT_MAX_ITER = 100


class TorusMap(Protocol):
    frame: EigenFrame

    def forward(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def chart_lipschitz(self) -> np.ndarray:
        """Nonnegative M with |dF_i| <= sum_j M_ij |dz_j| in chart coordinates."""

        raise NotImplementedError

    def chart_lipschitz_inverse(self) -> np.ndarray:
        raise NotImplementedError

    def chart_jacobian(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def bisect_increasing(
    fn: Callable[[np.ndarray], np.ndarray],
    target: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    steps: int = BISECTION_STEPS,
) -> np.ndarray:
    """Solve fn(x) = target for x in [lo, hi], fn increasing, elementwise."""

    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    target = np.asarray(target, dtype=float)
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class LinearMap:
    frame: EigenFrame

    def forward(self, pts: np.ndarray) -> np.ndarray:
        return reduce_mod1(np.asarray(pts, dtype=float) @ self.frame.matrix_array.T)

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        return reduce_mod1(np.asarray(pts, dtype=float) @ self.frame.matrix_inv_array.T)

    def chart_lipschitz(self) -> np.ndarray:
        return np.diag([self.frame.alpha, self.frame.beta])

    def chart_lipschitz_inverse(self) -> np.ndarray:
        return np.diag([1.0 / self.frame.alpha, 1.0 / self.frame.beta])

    def chart_jacobian(self, pts: np.ndarray) -> np.ndarray:
        n = np.asarray(pts, dtype=float).reshape(-1, 2).shape[0]
        return np.broadcast_to(self.chart_lipschitz(), (n, 2, 2)).copy()


class _LocalizedMap:
    """Shared plumbing: F in chart coordinates inside the square, A outside."""

    frame: EigenFrame
    r: float

    def chart_forward(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def chart_inverse(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _linear(self) -> np.ndarray:
        return np.array([self.frame.alpha, self.frame.beta])

    def in_support(self, z: np.ndarray) -> np.ndarray:
        return np.max(np.abs(z), axis=-1) < self.r

    def in_image_support(self, z: np.ndarray) -> np.ndarray:
        lin = self._linear() * self.r
        return np.all(np.abs(z) < lin, axis=-1)

    def forward(self, pts: np.ndarray) -> np.ndarray:
        shape = np.shape(pts)
        x = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = x @ self.frame.matrix_array.T
        z = origin_chart_coords(self.frame, x)
        mask = self.in_support(z)
        if np.any(mask):
            out[mask] = self.frame.from_chart(self.chart_forward(z[mask]))
        return reduce_mod1(out).reshape(shape)

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        shape = np.shape(pts)
        x = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = x @ self.frame.matrix_inv_array.T
        z = origin_chart_coords(self.frame, x)
        mask = self.in_image_support(z)
        if np.any(mask):
            out[mask] = self.frame.from_chart(self.chart_inverse(z[mask]))
        return reduce_mod1(out).reshape(shape)


@dataclass(frozen=True, eq=False)
class LewowiczMap(_LocalizedMap):
    """F(w, v) = (alpha w + lam(w) mu(v), beta v) in the eigen-chart."""

    frame: EigenFrame
    r: float
    profile: LewowiczProfile

    def chart_forward(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        w, v = z[..., 0], z[..., 1]
        fw = self.frame.alpha * w + self.profile.lam(w) * self.profile.mu(v)
        return np.stack([fw, self.frame.beta * v], axis=-1)

    def chart_inverse(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        v = z[..., 1] / self.frame.beta
        mu_v = self.profile.mu(v)
        alpha = self.frame.alpha

        def fw(w: np.ndarray) -> np.ndarray:
            return alpha * w + self.profile.lam(w) * mu_v

        lo = np.full(v.shape, -self.r)
        hi = np.full(v.shape, self.r)
        w = bisect_increasing(fw, z[..., 0], lo, hi)
        return np.stack([w, v], axis=-1)

    def chart_jacobian(self, pts: np.ndarray) -> np.ndarray:
        x = np.asarray(pts, dtype=float).reshape(-1, 2)
        z = origin_chart_coords(self.frame, x)
        w, v = z[:, 0], z[:, 1]
        inside = self.in_support(z)
        mu = self.profile.mu(v)
        jac = np.zeros((x.shape[0], 2, 2))
        jac[:, 0, 0] = np.where(
            inside, self.frame.alpha + self.profile.lam_prime(w) * mu, self.frame.alpha
        )
        cross = self.profile.lam(w) * self.profile.mu_prime(v)
        jac[:, 0, 1] = np.where(inside, cross, 0.0)
        jac[:, 1, 1] = self.frame.beta
        return jac

    def chart_lipschitz(self) -> np.ndarray:
        a_max = self.profile.rate_range[1]
        cross = self.profile.lam_max * self.profile.mu_prime_max
        return np.array([[a_max, cross], [0.0, self.frame.beta]])

    def chart_lipschitz_inverse(self) -> np.ndarray:
        a_min = self.profile.rate_range[0]
        cross = self.profile.lam_max * self.profile.mu_prime_max
        beta = self.frame.beta
        return np.array([[1.0 / a_min, cross / (a_min * beta)], [0.0, 1.0 / beta]])


@dataclass(frozen=True, eq=False)
class PiecewiseMap(_LocalizedMap):
    """F = G2 o G1, a tent-localized version of (mu1(w), mu2(v)).

    G1(w, v) = (alpha w + kappa(v) (mu1(w) - alpha w), v)
    G2(w, v) = (w, beta v + kappa(w / alpha) (mu2(v) - beta v))
    """

    frame: EigenFrame
    r: float
    profile: PiecewiseProfile

    def _g1(self, w: np.ndarray, v: np.ndarray) -> np.ndarray:
        a = self.frame.alpha
        return a * w + tent(v, self.r) * (self.profile.mu1(w) - a * w)

    def _g2(self, w1: np.ndarray, v: np.ndarray) -> np.ndarray:
        b = self.frame.beta
        cut = tent(w1 / self.frame.alpha, self.r)
        return b * v + cut * (self.profile.mu2(v) - b * v)

    def chart_forward(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        w1 = self._g1(z[..., 0], z[..., 1])
        return np.stack([w1, self._g2(w1, z[..., 1])], axis=-1)

    def chart_inverse(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        w1 = z[..., 0]
        lo = np.full(w1.shape, -self.r)
        hi = np.full(w1.shape, self.r)
        v = bisect_increasing(lambda y: self._g2(w1, y), z[..., 1], lo, hi)
        w = bisect_increasing(lambda x: self._g1(x, v), w1, lo, hi)
        return np.stack([w, v], axis=-1)

    def chart_jacobian(self, pts: np.ndarray) -> np.ndarray:
        raise NotDifferentiable(
            "piecewise_homeo maps are only Lipschitz; they have no Jacobian at the "
            "breakpoints"
        )

    def _slope_bounds(self) -> tuple[float, float, float, float]:
        s1 = self.profile.slopes1
        s2 = self.profile.slopes2
        return (
            float(np.min(s1)),
            float(np.max(s1)),
            float(np.min(s2)),
            float(np.max(s2)),
        )

    def chart_lipschitz(self) -> np.ndarray:
        a, b, r = self.frame.alpha, self.frame.beta, self.r
        _, s1_max, _, s2_max = self._slope_bounds()
        couple1 = TENT_SLOPE_FACTOR / r * self.profile.dev1_max
        m1 = np.array([[max(a, s1_max), couple1], [0.0, 1.0]])
        m2 = np.array(
            [
                [1.0, 0.0],
                [TENT_SLOPE_FACTOR / (a * r) * self.profile.dev2_max, max(b, s2_max)],
            ]
        )
        return m2 @ m1

    def chart_lipschitz_inverse(self) -> np.ndarray:
        a, b, r = self.frame.alpha, self.frame.beta, self.r
        s1_min, _, s2_min, _ = self._slope_bounds()
        rate1 = min(a, s1_min)
        rate2 = min(b, s2_min)
        couple1 = TENT_SLOPE_FACTOR / r * self.profile.dev1_max
        couple2 = TENT_SLOPE_FACTOR / (a * r) * self.profile.dev2_max
        g2_inv = np.array(
            [
                [1.0, 0.0],
                [couple2 / rate2, 1.0 / rate2],
            ]
        )
        g1_inv = np.array([[1.0 / rate1, couple1 / rate1], [0.0, 1.0]])
        return g1_inv @ g2_inv


@dataclass(frozen=True, eq=False)
class PerturbedMap:
    """g = (id + phi) o f."""

    frame: EigenFrame
    base: TorusMap
    field: DisplacementField

    def forward(self, pts: np.ndarray) -> np.ndarray:
        y = self.base.forward(pts)
        return reduce_mod1(y + self.field(y))

    def _solve_shift(self, q: np.ndarray) -> np.ndarray:
        # y + phi(y) = q on the lift; phi is a contraction.
        y = np.array(q, dtype=float, copy=True)
        for _ in range(FIXED_POINT_MAX_ITER):
            nxt = q - self.field(y)
            if float(np.max(np.abs(nxt - y), initial=0.0)) < FIXED_POINT_TOL:
                return nxt
            y = nxt
        raise NonConvergence(
            f"fixed-point inverse did not reach {FIXED_POINT_TOL:g} in "
            f"{FIXED_POINT_MAX_ITER} iterations (field Lipschitz "
            f"{self.field.lipschitz:.6g})"
        )

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        q = np.asarray(pts, dtype=float)
        if self.field.is_zero:
            return self.base.inverse(q)
        return self.base.inverse(reduce_mod1(self._solve_shift(q)))

    def _field_chart_lipschitz(self) -> np.ndarray:
        return self.field.lipschitz * self.frame.cond * np.ones((2, 2))

    def chart_lipschitz(self) -> np.ndarray:
        return (np.eye(2) + self._field_chart_lipschitz()) @ self.base.chart_lipschitz()

    def chart_lipschitz_inverse(self) -> np.ndarray:
        ell = self.field.lipschitz
        shift = np.eye(2) + self._field_chart_lipschitz() / (1.0 - ell)
        return self.base.chart_lipschitz_inverse() @ shift

    def chart_jacobian(self, pts: np.ndarray) -> np.ndarray:
        raise NotDifferentiable("perturbed systems are handled as homeomorphisms only")
