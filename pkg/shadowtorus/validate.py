from __future__ import annotations

import math

import numpy as np

from shadowtorus.errors import (
    InvalidParameters,
    InvalidProfile,
    NotInvertible,
    SupportTooLarge,
)
from shadowtorus.model import SystemSpec, Variant
from shadowtorus.profiles import LewowiczProfile, PiecewiseProfile

PROFILE_RESIDUAL_TOL = 1e-10
SUPPORT_BALL_RADIUS = 0.25


def support_radius(sys: SystemSpec) -> float:
    """Euclidean radius of the chart square |w|, |v| <= r about the origin."""

    return sys.r * sys.frame.corner_norm


def image_support_radius(sys: SystemSpec) -> float:
    """Radius bound of A(square) = E diag(alpha, beta) square."""

    e_norm = float(np.linalg.norm(sys.frame.chart, 2))
    return sys.r * e_norm * math.hypot(sys.alpha, sys.beta)


def validate_support(sys: SystemSpec) -> None:
    if sys.r < 0 or not math.isfinite(sys.r):
        raise InvalidParameters(f"bump radius r must be >= 0 (got {sys.r})")
    rad = support_radius(sys)
    if rad >= SUPPORT_BALL_RADIUS:
        raise SupportTooLarge(
            f"perturbation support of radius {rad:.6g} does not fit the "
            f"fundamental-domain ball of radius {SUPPORT_BALL_RADIUS}"
        )
    img = image_support_radius(sys)
    if img >= SUPPORT_BALL_RADIUS:
        raise SupportTooLarge(
            f"image of the perturbation support (radius {img:.6g}) does not fit the "
            f"fundamental-domain ball of radius {SUPPORT_BALL_RADIUS}"
        )


def validate_lewowicz_profile(profile: LewowiczProfile) -> None:
    if profile.r <= 0:
        raise InvalidProfile(
            f"bump radius must be > 0 (got {profile.r})", clause="r > 0"
        )
    if profile.mu_power < 1:
        raise InvalidProfile(
            f"mu_power must be >= 1 (got {profile.mu_power})", clause="mu_power >= 1"
        )

    h0 = float(profile.h(np.array(0.0)))
    if abs(h0) > PROFILE_RESIDUAL_TOL:
        raise InvalidProfile(f"h(0) = {h0:.3g}", clause="h(0) = 0")

    h_lo, h_hi = profile.h_range
    if h_lo < -PROFILE_RESIDUAL_TOL or h_hi >= 1.0:
        raise InvalidProfile(
            f"h ranges over [{h_lo:.6g}, {h_hi:.6g}] (h_skew={profile.h_skew})",
            clause="0 <= h < 1",
        )

    h_r = float(profile.h(np.array(profile.r)))
    if abs(h_r - (1.0 - profile.alpha)) > PROFILE_RESIDUAL_TOL:
        raise InvalidProfile(
            f"h(r) = {h_r:.12g} differs from 1 - alpha",
            clause="h(s) = 1 - alpha, |s| >= r",
        )

    if profile.integral_residual > PROFILE_RESIDUAL_TOL:
        raise InvalidProfile(
            f"integral residual {profile.integral_residual:.3g}",
            clause="int_0^r ((1 - alpha) - h) = 0",
        )

    mu0 = float(profile.mu(np.array(0.0)))
    if abs(mu0 - 1.0) > PROFILE_RESIDUAL_TOL:
        raise InvalidProfile(f"mu(0) = {mu0:.12g}", clause="mu(0) = 1")


def _check_pl(
    name: str,
    knots: tuple[float, ...],
    values: tuple[float, ...],
    *,
    r: float,
    slope_at_edge: float,
) -> None:
    if len(knots) != len(values) or len(knots) < 2:
        raise InvalidProfile(
            f"{name} needs matching knot and value lists of length >= 2",
            clause=f"{name} breakpoints",
        )
    k = np.asarray(knots, dtype=float)
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(k)) or not np.all(np.isfinite(v)):
        raise InvalidProfile(
            f"{name} breakpoints must be finite", clause=f"{name} breakpoints"
        )
    if not np.all(np.diff(k) > 0):
        raise InvalidProfile(
            f"{name} knots must increase", clause=f"{name} breakpoints"
        )
    if abs(k[0] + r) > PROFILE_RESIDUAL_TOL or abs(k[-1] - r) > PROFILE_RESIDUAL_TOL:
        raise InvalidProfile(
            f"{name} knots must span [-r, r]", clause=f"{name} breakpoints"
        )
    if not np.all(np.diff(v) > 0):
        raise InvalidProfile(
            f"{name} must be strictly increasing", clause=f"{name} increasing"
        )
    edge = slope_at_edge * r
    tol = PROFILE_RESIDUAL_TOL
    if abs(v[0] + edge) > tol or abs(v[-1] - edge) > tol:
        raise InvalidProfile(
            f"{name}(+-r) must equal +-{edge:.6g}",
            clause=f"{name} matches the linear map for |x| >= r",
        )


def validate_piecewise_profile(profile: PiecewiseProfile) -> None:
    lip = profile.lip_lambda
    if profile.r <= 0:
        raise InvalidProfile(
            f"bump radius must be > 0 (got {profile.r})", clause="r > 0"
        )
    if not (0.0 < lip < 1.0):
        raise InvalidProfile(
            f"lip_lambda must lie in (0, 1) (got {lip})", clause="0 < lip_lambda < 1"
        )
    # mu1(r) - mu1(-r) = 2 alpha r forces a mean slope of alpha.
    if lip < profile.alpha:
        raise InvalidProfile(
            f"lip_lambda = {lip} is below alpha = {profile.alpha:.6g}",
            clause="lip_lambda >= alpha",
        )

    r = profile.r
    _check_pl(
        "mu1", profile.knots1, profile.values1, r=r, slope_at_edge=profile.alpha
    )
    _check_pl(
        "mu2", profile.knots2, profile.values2, r=r, slope_at_edge=profile.beta
    )

    tol = 1e-12
    if float(np.max(profile.slopes1)) > lip * (1.0 + tol):
        raise InvalidProfile(
            f"mu1 slope {float(np.max(profile.slopes1)):.6g} exceeds lip_lambda",
            clause="|mu1(x + nu) - mu1(x)| <= lip_lambda |nu|",
        )
    if float(np.min(profile.slopes2)) < (1.0 / lip) * (1.0 - tol):
        raise InvalidProfile(
            f"mu2 slope {float(np.min(profile.slopes2)):.6g} is below 1/lip_lambda",
            clause="|mu2(y + nu) - mu2(y)| >= |nu| / lip_lambda",
        )


def validate_system(sys: SystemSpec) -> None:
    if sys.variant is Variant.PERTURBED:
        if sys.base is None or sys.field is None:
            raise InvalidParameters("perturbed system needs a base system and a field")
        validate_system(sys.base)
        if sys.field.amplitude < 0 or not math.isfinite(sys.field.amplitude):
            raise InvalidParameters(
                f"field amplitude must be >= 0 (got {sys.field.amplitude})"
            )
        n = len(sys.field.weights)
        lengths = {
            len(sys.field.wavevectors),
            len(sys.field.phases),
            len(sys.field.directions),
            n,
        }
        if len(lengths) != 1:
            raise InvalidParameters("field mode lists must have equal lengths")
        if sys.field.lipschitz >= 1.0:
            raise NotInvertible(
                f"displacement field Lipschitz constant {sys.field.lipschitz:.6g} "
                "must be < 1 for id + field to be a homeomorphism"
            )
        return

    validate_support(sys)
    if sys.variant is Variant.LINEAR:
        return
    if sys.variant is Variant.LEWOWICZ_SMOOTH:
        if sys.lewowicz is None:
            raise InvalidParameters("lewowicz_smooth system is missing its profile")
        validate_lewowicz_profile(sys.lewowicz)
        return
    if sys.variant is Variant.PIECEWISE_HOMEO:
        if sys.piecewise is None:
            raise InvalidParameters("piecewise_homeo system is missing its profile")
        validate_piecewise_profile(sys.piecewise)
        return
    raise AssertionError(f"Unhandled variant: {sys.variant}")
