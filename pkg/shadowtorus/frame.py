from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from shadowtorus.errors import InvalidParameters

CAT_MATRIX: tuple[tuple[int, int], tuple[int, int]] = ((2, 1), (1, 1))


@dataclass(frozen=True, eq=False)
class EigenFrame:
    """Eigen-chart of a hyperbolic automorphism of R^2/Z^2.

    Chart coordinates are (w, v): w along the contracting eigenvector, v along the
    expanding one, so a lift displacement is ``chart @ (w, v)``.
    """

    matrix: tuple[tuple[int, int], tuple[int, int]]
    alpha: float
    beta: float
    u_contract: np.ndarray
    u_expand: np.ndarray
    chart: np.ndarray
    chart_inv: np.ndarray

    @property
    def matrix_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @property
    def matrix_inv_array(self) -> np.ndarray:
        (a, b), (c, d) = self.matrix
        # det(A) == 1
        return np.array([[d, -b], [-c, a]], dtype=float)

    @property
    def cond(self) -> float:
        return float(np.linalg.cond(self.chart, 2))

    @property
    def chart_radius(self) -> float:
        return 0.25 / self.cond

    @property
    def corner_norm(self) -> float:
        """Largest Euclidean length of ``chart @ (±1, ±1)``: the inf->2 norm of E."""

        return float(
            max(
                np.linalg.norm(self.u_contract + self.u_expand),
                np.linalg.norm(self.u_contract - self.u_expand),
            )
        )

    def to_chart(self, disp: np.ndarray) -> np.ndarray:
        """Standard displacement(s) (..., 2) -> chart coordinates (..., 2)."""

        return disp @ self.chart_inv.T

    def from_chart(self, wv: np.ndarray) -> np.ndarray:
        return wv @ self.chart.T

    def to_json(self) -> dict[str, Any]:
        return {"matrix": [list(row) for row in self.matrix]}


def _eigvec(matrix: np.ndarray, lam: float) -> np.ndarray:
    a, b = matrix[0]
    vec = np.array([b, lam - a], dtype=float)
    vec /= np.linalg.norm(vec)
    if vec[0] < 0:
        vec = -vec
    return vec


def make_frame(
    matrix: tuple[tuple[int, int], tuple[int, int]] | list[list[int]] = CAT_MATRIX,
) -> EigenFrame:
    arr = np.asarray(matrix)
    if arr.shape != (2, 2):
        raise InvalidParameters(f"matrix must be 2x2 (got shape {arr.shape})")
    if not np.all(np.equal(arr, np.round(arr))):
        raise InvalidParameters("matrix must have integer entries")

    ints = tuple(tuple(int(x) for x in row) for row in arr.tolist())
    (a, b), (c, d) = ints
    det = a * d - b * c
    if det != 1:
        raise InvalidParameters(f"matrix must be unimodular with det 1 (got {det})")
    tr = a + d
    if tr <= 2:
        raise InvalidParameters(
            f"matrix must be hyperbolic with positive eigenvalues, trace > 2 (got {tr})"
        )

    root = math.sqrt(tr * tr - 4)
    alpha = 0.5 * (tr - root)
    beta = 0.5 * (tr + root)

    a_f = np.array(ints, dtype=float)
    u_c = _eigvec(a_f, alpha)
    u_e = _eigvec(a_f, beta)
    chart = np.column_stack([u_c, u_e])
    chart_inv = np.linalg.inv(chart)

    return EigenFrame(
        matrix=ints,  # type: ignore[arg-type]
        alpha=float(alpha),
        beta=float(beta),
        u_contract=u_c,
        u_expand=u_e,
        chart=chart,
        chart_inv=chart_inv,
    )
