from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Any, Literal, overload

import numpy as np

from shadowtorus.errors import InvalidParameters, NotInvertible
from shadowtorus.frame import CAT_MATRIX, make_frame
from shadowtorus.maps import (
    LewowiczMap,
    LinearMap,
    PerturbedMap,
    PiecewiseMap,
    TorusMap,
)
from shadowtorus.model import (
    DisplacementField,
    SystemSpec,
    Variant,
    lewowicz_profile_from_json,
    piecewise_profile_from_json,
)
from shadowtorus.torus import PointLike, TorusPoint, as_points, chart_coords, displace
from shadowtorus.validate import validate_system

logger = logging.getLogger(__name__)

DEFAULT_N_MODES = 3
DEFAULT_MAX_WAVENUMBER = 2


def make_cat_system(
    variant: Variant | str,
    r: float = 0.0,
    profile_params: dict[str, Any] | None = None,
    *,
    matrix: Any = CAT_MATRIX,
    seed: int = 0,
) -> SystemSpec:
    """Build and validate one of the three base systems on the torus."""

    v = variant if isinstance(variant, Variant) else Variant.parse(variant)
    if v is Variant.PERTURBED:
        raise InvalidParameters("use make_perturbation to build perturbed systems")
    frame = make_frame(matrix)
    params = dict(profile_params or {})
    r = float(r)

    sys = SystemSpec(
        variant=v,
        frame=frame,
        r=r,
        lewowicz=(
            lewowicz_profile_from_json(params, r=r, alpha=frame.alpha)
            if v is Variant.LEWOWICZ_SMOOTH
            else None
        ),
        piecewise=(
            piecewise_profile_from_json(
                params, r=r, alpha=frame.alpha, beta=frame.beta
            )
            if v is Variant.PIECEWISE_HOMEO
            else None
        ),
        seed=int(seed),
    )
    validate_system(sys)
    return sys


@lru_cache(maxsize=256)
def map_for_system(sys: SystemSpec) -> TorusMap:
    """Select the map implementation for a validated system.

    SystemSpec hashes by identity, so each spec object builds its map once.
    """

    if sys.variant is Variant.LINEAR:
        return LinearMap(frame=sys.frame)
    if sys.variant is Variant.LEWOWICZ_SMOOTH:
        assert sys.lewowicz is not None
        return LewowiczMap(frame=sys.frame, r=sys.r, profile=sys.lewowicz)
    if sys.variant is Variant.PIECEWISE_HOMEO:
        assert sys.piecewise is not None
        return PiecewiseMap(frame=sys.frame, r=sys.r, profile=sys.piecewise)
    if sys.variant is Variant.PERTURBED:
        assert sys.base is not None and sys.field is not None
        return PerturbedMap(
            frame=sys.frame, base=map_for_system(sys.base), field=sys.field
        )
    raise AssertionError(f"Unhandled variant: {sys.variant}")


@overload
def eval_forward(sys: SystemSpec, p: TorusPoint) -> TorusPoint: ...


@overload
def eval_forward(sys: SystemSpec, p: Any) -> np.ndarray: ...


def eval_forward(sys: SystemSpec, p: Any) -> TorusPoint | np.ndarray:
    """f(p); TorusPoint in, TorusPoint out, otherwise vectorised over (..., 2)."""

    out = map_for_system(sys).forward(as_points(p))
    return TorusPoint.from_array(out) if isinstance(p, TorusPoint) else out


@overload
def eval_inverse(sys: SystemSpec, p: TorusPoint) -> TorusPoint: ...


@overload
def eval_inverse(sys: SystemSpec, p: Any) -> np.ndarray: ...


def eval_inverse(sys: SystemSpec, p: Any) -> TorusPoint | np.ndarray:
    out = map_for_system(sys).inverse(as_points(p))
    return TorusPoint.from_array(out) if isinstance(p, TorusPoint) else out


def iterate(sys: SystemSpec, p: PointLike, k: int) -> np.ndarray:
    """k-fold iterate; negative k iterates the inverse."""

    m = map_for_system(sys)
    x = as_points(p)
    step = m.forward if k >= 0 else m.inverse
    for _ in range(abs(int(k))):
        x = step(x)
    return x


def orbit(sys: SystemSpec, p: PointLike, m: int) -> np.ndarray:
    """Points p, f(p), ..., f^m(p) stacked on a new leading axis."""

    fmap = map_for_system(sys)
    x = as_points(p)
    out = [x]
    for _ in range(int(m)):
        x = fmap.forward(x)
        out.append(x)
    return np.stack(out, axis=0)


def jacobian_at(
    sys: SystemSpec,
    p: PointLike,
    *,
    coords: Literal["eigen", "standard"] = "eigen",
) -> np.ndarray:
    jac = map_for_system(sys).chart_jacobian(as_points(p))[0]
    if coords == "eigen":
        return jac
    if coords == "standard":
        return sys.frame.chart @ jac @ sys.frame.chart_inv
    raise InvalidParameters(f"coords must be 'eigen' or 'standard' (got {coords!r})")


def chart_lipschitz_matrix(sys: SystemSpec, *, inverse: bool = False) -> np.ndarray:
    m = map_for_system(sys)
    return m.chart_lipschitz_inverse() if inverse else m.chart_lipschitz()


def euclidean_lipschitz(sys: SystemSpec, *, inverse: bool = False) -> float:
    """Lipschitz bound of f (or f^-1) for the Euclidean metric on the lift."""

    mat = chart_lipschitz_matrix(sys, inverse=inverse)
    e_norm = np.linalg.norm(sys.frame.chart, 2)
    e_inv_norm = np.linalg.norm(sys.frame.chart_inv, 2)
    return float(e_norm * np.linalg.norm(mat, 2) * e_inv_norm)


def horizontal_contraction_samples(
    sys: SystemSpec, delta2: float, n: int, seed: int
) -> np.ndarray:
    """Quotients |f_w(p') - f_w(p)| / |nu| for p' = p + nu u_contract.

    nu is drawn with 0 < |nu| <= delta2.
    """

    if not delta2 > 0:
        raise InvalidParameters(f"delta2 must be > 0 (got {delta2})")
    rng = np.random.default_rng(seed)
    p = rng.random((int(n), 2))
    # 1 - U lies in (0, 1].
    nu = delta2 * (1.0 - rng.random(int(n))) * rng.choice([-1.0, 1.0], size=int(n))
    q = displace(sys.frame, p, np.stack([nu, np.zeros_like(nu)], axis=-1))
    fp = eval_forward(sys, p)
    fq = eval_forward(sys, q)
    dw = chart_coords(sys.frame, fp, fq)[:, 0]
    return np.abs(dw) / np.abs(nu)


def _random_field(
    sys: SystemSpec,
    *,
    n_modes: int,
    max_wavenumber: int,
    direction: str,
    seed: int,
) -> DisplacementField:
    rng = np.random.default_rng(seed)
    kvecs: list[tuple[int, int]] = []
    while len(kvecs) < n_modes:
        k = rng.integers(-max_wavenumber, max_wavenumber + 1, size=2)
        if k[0] == 0 and k[1] == 0:
            continue
        kvecs.append((int(k[0]), int(k[1])))
    weights = tuple(float(c) for c in rng.uniform(0.5, 1.0, size=n_modes))
    phases = tuple(float(t) for t in rng.uniform(0.0, 2.0 * math.pi, size=n_modes))
    if direction == "expand":
        u = sys.frame.u_expand
        dirs = tuple((float(u[0]), float(u[1])) for _ in range(n_modes))
    elif direction == "mixed":
        ang = rng.uniform(0.0, 2.0 * math.pi, size=n_modes)
        dirs = tuple((float(math.cos(a)), float(math.sin(a))) for a in ang)
    else:
        raise InvalidParameters(
            f"direction must be 'expand' or 'mixed' (got {direction!r})"
        )
    return DisplacementField(
        amplitude=1.0,
        wavevectors=tuple(kvecs),
        weights=weights,
        phases=phases,
        directions=dirs,
    )


def _inverse_amplification(base: SystemSpec, field: DisplacementField) -> float:
    """Factor F with |f^-1(q) - f^-1(q - phi)| <= F |phi| for this field."""

    dirs = np.asarray(field.directions, dtype=float)
    along_expand = bool(dirs.size) and bool(
        np.allclose(np.abs(dirs @ base.frame.u_expand), 1.0, atol=1e-12)
    )
    if along_expand:
        # phi moves points by (0, c) in the chart, |c| <= amplitude.
        m_inv = chart_lipschitz_matrix(base, inverse=True)
        col = np.abs(base.frame.chart) @ m_inv[:, 1]
        return max(1.0, float(np.linalg.norm(col)))
    return max(1.0, euclidean_lipschitz(base, inverse=True))


def perturbation_rho_bound(sys: SystemSpec) -> float:
    """Guaranteed bound on rho(f, g) for g = (id + phi) o f."""

    if sys.variant is not Variant.PERTURBED:
        return 0.0
    assert sys.base is not None and sys.field is not None
    if sys.field.is_zero:
        return 0.0
    factor = _inverse_amplification(sys.base, sys.field)
    return sys.field.amplitude * factor / (1.0 - sys.field.lipschitz)


def make_perturbation(
    base: SystemSpec,
    displacement_params: dict[str, Any] | None,
    seed: int,
) -> SystemSpec:
    """g = (id + phi) o f for a seeded Fourier field phi.

    ``displacement_params`` takes exactly one of ``sup_norm``, ``rho_bound`` or
    ``lipschitz`` plus optional ``n_modes``, ``max_wavenumber`` and ``direction``
    ("expand", the default, or "mixed").
    """

    params = dict(displacement_params or {})
    given = [k for k in ("sup_norm", "rho_bound", "lipschitz") if k in params]
    if len(given) != 1:
        raise InvalidParameters(
            "displacement params need exactly one of sup_norm, rho_bound, lipschitz "
            f"(got {given})"
        )
    n_modes = int(params.get("n_modes", DEFAULT_N_MODES))
    max_k = int(params.get("max_wavenumber", DEFAULT_MAX_WAVENUMBER))
    if n_modes < 1 or max_k < 1:
        raise InvalidParameters("n_modes and max_wavenumber must be >= 1")

    unit = _random_field(
        base,
        n_modes=n_modes,
        max_wavenumber=max_k,
        direction=str(params.get("direction", "expand")),
        seed=seed,
    )
    kappa = unit.lipschitz_per_amplitude
    key = given[0]
    target = float(params[key])
    if target < 0:
        raise InvalidParameters(f"{key} must be >= 0 (got {target})")
    if key == "sup_norm":
        amplitude = target
    elif key == "lipschitz":
        amplitude = target / kappa
    else:
        # rho = s F / (1 - s kappa)  =>  s = rho / (F + rho kappa)
        factor = _inverse_amplification(base, unit)
        amplitude = target / (factor + target * kappa)

    field = DisplacementField(
        amplitude=float(amplitude),
        wavevectors=unit.wavevectors,
        weights=unit.weights,
        phases=unit.phases,
        directions=unit.directions,
    )
    if field.lipschitz >= 1.0:
        raise NotInvertible(
            f"displacement field Lipschitz constant {field.lipschitz:.6g} must be < 1"
        )
    g = SystemSpec(
        variant=Variant.PERTURBED,
        frame=base.frame,
        r=base.r,
        base=base,
        field=field,
        seed=int(seed),
    )
    validate_system(g)
    logger.info(
        "perturbation: sup_norm=%.6g lipschitz=%.6g rho_bound=%.6g",
        field.amplitude,
        field.lipschitz,
        perturbation_rho_bound(g),
    )
    return g
