"""Cubic radial-basis surrogate with an affine tail.

The surrogate through N measured configurations is

    s(u) = sum_j c_j * ||u - u_j||^3 + b0 + b . u

in metric coordinates, solved as the square (N+d+1) system

    | A  P | | c |   | y |
    | P' 0 | | b | = | 0 |

with A_ij = ||u_i - u_j||^3 and P = [1 | u]. The P'c = 0 rows make the
system well posed for the cubic basis and force exact reproduction of
affine data. Solutions are residual-checked; a failed check rejects the
model rather than returning junk coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import linalg
from .errors import (
    DegenerateGeometry,
    DuplicatePoints,
    NumericallyUnstable,
    RankDeficient,
)
from .paramspace import ParamSpace, metric_coords, metric_matrix

PointKind = Literal["initial", "incremental", "imported"]
POINT_KINDS = ("initial", "incremental", "imported")

# metric distance below which two centers count as the same point
DUPLICATE_DISTANCE = 1e-9

BASIS_EXPONENT = 3


@dataclass(frozen=True)
class SupportPoint:
    x: tuple[float, ...]
    y: float
    kind: PointKind = "imported"


@dataclass(frozen=True, eq=False)
class SplineModel:
    """Fitted surrogate; immutable and safe to evaluate concurrently."""

    space: ParamSpace
    centers: np.ndarray       # (N, d) metric coordinates
    rbf_coeffs: np.ndarray    # (N,)
    poly_coeffs: np.ndarray   # (d+1,), constant term first
    fit_residual: float
    condition_hint: float     # smallest retained |R| diagonal of the solve
    basis_exponent: int = BASIS_EXPONENT

    @property
    def n_centers(self) -> int:
        return self.centers.shape[0]


def build_system(space: ParamSpace, points: Sequence[SupportPoint]):
    """Assemble the interpolation system; returns (matrix, rhs, centers)."""
    centers = metric_matrix(space, [p.x for p in points])
    y = np.array([p.y for p in points], dtype=float)
    n, d = centers.shape

    diffs = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt((diffs * diffs).sum(axis=-1))
    a = dist**BASIS_EXPONENT

    p_aff = np.hstack([np.ones((n, 1)), centers])
    m = np.zeros((n + d + 1, n + d + 1))
    m[:n, :n] = a
    m[:n, n:] = p_aff
    m[n:, :n] = p_aff.T
    rhs = np.concatenate([y, np.zeros(d + 1)])
    return m, rhs, centers


def fit(
    space: ParamSpace,
    points: Sequence[SupportPoint],
    residual_tol: float = 1e-6,
) -> SplineModel:
    """Fit the surrogate through all points, rejecting unstable solutions."""
    points = list(points)
    n, d = len(points), space.d
    centers = metric_matrix(space, [p.x for p in points])

    if n >= 2:
        diffs = centers[:, None, :] - centers[None, :, :]
        dist = np.sqrt((diffs * diffs).sum(axis=-1))
        off = dist + np.diag(np.full(n, np.inf))
        if np.min(off) < DUPLICATE_DISTANCE:
            i, j = np.unravel_index(np.argmin(off), off.shape)
            raise DuplicatePoints(f"support points {i} and {j} coincide")

    p_aff = np.hstack([np.ones((n, 1)), centers])
    aff = linalg.qr_decompose(p_aff)
    if aff.rank < d + 1:
        raise DegenerateGeometry(
            f"support points span affine rank {aff.rank}, need {d + 1}"
        )

    m, rhs, centers = build_system(space, points)
    factorization = linalg.qr_decompose(m)
    try:
        sol = linalg.qr_solve(factorization, rhs)
    except RankDeficient as err:
        raise NumericallyUnstable(f"surrogate system is singular: {err}") from err

    check = linalg.verify_residual(m, sol, rhs, residual_tol)
    if not check.passed:
        raise NumericallyUnstable(
            f"residual {check.max_residual:.3e} exceeds {residual_tol:g}"
        )

    diag = factorization.diagonal()
    return SplineModel(
        space=space,
        centers=centers,
        rbf_coeffs=sol[:n],
        poly_coeffs=sol[n:],
        fit_residual=check.max_residual,
        condition_hint=float(diag[factorization.rank - 1]),
    )


def evaluate(model: SplineModel, x) -> float:
    """Surrogate value at a configuration (extrapolates outside the box)."""
    u = metric_coords(model.space, x)
    r = np.linalg.norm(model.centers - u, axis=1)
    return float(
        model.rbf_coeffs @ r**model.basis_exponent
        + model.poly_coeffs[0]
        + model.poly_coeffs[1:] @ u
    )


def evaluate_batch(model: SplineModel, xs) -> np.ndarray:
    """Vectorized :func:`evaluate` over rows of ``xs``."""
    u = metric_matrix(model.space, xs)
    diffs = u[:, None, :] - model.centers[None, :, :]
    r = np.sqrt((diffs * diffs).sum(axis=-1))
    return (
        r**model.basis_exponent @ model.rbf_coeffs
        + model.poly_coeffs[0]
        + u @ model.poly_coeffs[1:]
    )


def evaluate_gradient(model: SplineModel, x) -> np.ndarray:
    """Analytic gradient in parameter units.

    d/du ||u - u_j||^3 = 3 ||u - u_j|| (u - u_j), which vanishes at the
    centers, plus the affine slope; the chain rule maps metric coordinates
    back to parameter units.
    """
    u = metric_coords(model.space, x)
    diffs = u - model.centers
    r = np.linalg.norm(diffs, axis=1)
    grad_u = 3.0 * (model.rbf_coeffs * r) @ diffs + model.poly_coeffs[1:]
    if model.space.normalize:
        return grad_u / model.space.spans
    return grad_u
