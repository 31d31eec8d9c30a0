"""Designs, covariance matrices and the dense linear algebra behind them.

Everything here is dense and double precision. Matrices are built from
a kernel and a design, certified positive semidefinite by their
smallest eigenvalue, and factorized without any jitter: if a Cholesky
factorization fails, the failure is the answer and surfaces as
``NotPositiveDefiniteError``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    NotPositiveDefiniteError,
)
from .kernels import Kernel, evaluate_array, lag0_variance

__all__ = [
    "Design",
    "CovMatrix",
    "MAX_POINTS",
    "build",
    "chol_lower",
    "ou_tridiag_inverse",
    "eig_extremes",
    "cov_to_csv",
]

# Dense ceiling: above this the O(n^3) algebra stops being interactive.
MAX_POINTS = 6000


@dataclass(frozen=True)
class Design:
    """Ordered observation locations on the line.

    Points must be nondecreasing; duplicated points describe a
    collapsed design, which is representable here but makes the
    covariance matrix singular downstream.
    """

    points: tuple[float, ...]
    space: tuple[float, float] | None = None

    def __post_init__(self):
        pts = tuple(float(x) for x in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise InvalidParameterError("a design needs at least two points")
        if any(b < a for a, b in zip(pts, pts[1:])):
            raise InvalidParameterError("design points must be nondecreasing")
        if self.space is not None:
            lo, hi = float(self.space[0]), float(self.space[1])
            if lo >= hi:
                raise InvalidParameterError("design space must satisfy a < b")
            object.__setattr__(self, "space", (lo, hi))
            if pts[0] < lo or pts[-1] > hi:
                raise InvalidParameterError(
                    f"design points must lie within [{lo}, {hi}]"
                )

    @classmethod
    def equispaced(cls, n: int, d: float, start: float = 0.0,
                   space: tuple[float, float] | None = None) -> "Design":
        """``n`` points with constant spacing ``d`` starting at ``start``."""
        if n < 2:
            raise InvalidParameterError("a design needs at least two points")
        if d <= 0.0:
            raise InvalidParameterError("spacing must be positive")
        return cls(tuple(start + i * d for i in range(n)), space=space)

    @classmethod
    def from_distances(cls, distances, start: float = 0.0,
                       space: tuple[float, float] | None = None) -> "Design":
        """Design anchored at ``start`` with the given inter-point gaps."""
        pts = start + np.concatenate([[0.0], np.cumsum(np.asarray(distances, float))])
        return cls(tuple(pts), space=space)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def distances(self) -> tuple[float, ...]:
        """Gaps between consecutive points."""
        return tuple(float(b - a) for a, b in zip(self.points, self.points[1:]))

    def lag_matrix(self) -> np.ndarray:
        pts = np.asarray(self.points)
        return np.abs(pts[:, None] - pts[None, :])


@dataclass(frozen=True)
class CovMatrix:
    """A kernel evaluated on a design, with its PSD certificate."""

    values: np.ndarray
    kernel: Kernel
    design: Design
    min_eig: float
    tol: float

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def psd_ok(self) -> bool:
        """Whether the smallest eigenvalue clears ``-tol``."""
        return self.min_eig >= -self.tol


def build(kernel: Kernel, design: Design) -> CovMatrix:
    """Evaluate the kernel on the design and certify it numerically.

    The certificate tolerance is ``1e-8 * n * C(0)``; matrices whose
    smallest eigenvalue falls below ``-tol`` report ``psd_ok = False``
    but are still returned, so callers can inspect them.
    """
    n = design.n
    if n > MAX_POINTS:
        raise InvalidParameterError(
            f"design has {n} points, above the dense ceiling of {MAX_POINTS}"
        )
    values = evaluate_array(kernel, design.lag_matrix())
    lo, _ = eig_extremes(values, need_max=False)
    tol = 1e-8 * n * lag0_variance(kernel)
    return CovMatrix(values=values, kernel=kernel, design=design,
                     min_eig=float(lo), tol=tol)


def chol_lower(cov) -> np.ndarray:
    """Lower Cholesky factor of a covariance matrix.

    Accepts a ``CovMatrix`` or a plain symmetric array. No jitter is
    added; a failed factorization raises ``NotPositiveDefiniteError``
    carrying the pivot index at which it broke down.
    """
    values = cov.values if isinstance(cov, CovMatrix) else np.asarray(cov, float)
    try:
        return linalg.cholesky(values, lower=True)
    except linalg.LinAlgError as exc:
        pivot = None
        match = re.search(r"(\d+)-th leading minor", str(exc))
        if match:
            pivot = int(match.group(1))
        raise NotPositiveDefiniteError(
            f"covariance matrix is not positive definite: {exc}", pivot=pivot
        ) from None


def ou_tridiag_inverse(n: int, c: float) -> np.ndarray:
    """Closed-form inverse of the equispaced exponential covariance.

    For the Toeplitz matrix with entries ``c ** |i - j|`` (one-step
    correlation ``c = exp(-r d)``), the inverse is tridiagonal:
    ``(1 - c**2) * inv`` has ones at the diagonal corners,
    ``1 + c**2`` elsewhere on the diagonal and ``-c`` off it.
    """
    if n < 2:
        raise InvalidParameterError("need at least a 2 x 2 matrix")
    if not 0.0 <= c < 1.0:
        raise InvalidParameterError(f"one-step correlation must lie in [0, 1), got {c}")
    inv = np.zeros((n, n))
    diag = np.full(n, 1.0 + c * c)
    diag[0] = diag[-1] = 1.0
    np.fill_diagonal(inv, diag)
    off = np.full(n - 1, -c)
    inv[np.arange(n - 1), np.arange(1, n)] = off
    inv[np.arange(1, n), np.arange(n - 1)] = off
    return inv / (1.0 - c * c)


def eig_extremes(values: np.ndarray, need_max: bool = True) -> tuple[float, float]:
    """Smallest (and optionally largest) eigenvalue of a symmetric matrix."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {values.shape}")
    n = values.shape[0]
    lo = linalg.eigh(values, eigvals_only=True, subset_by_index=[0, 0])[0]
    if not need_max:
        return float(lo), float("nan")
    hi = linalg.eigh(values, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0]
    return float(lo), float(hi)


def cov_to_csv(cov: CovMatrix, path) -> None:
    """Write the matrix row-major as CSV, full scientific precision."""
    header = ",".join(repr(x) for x in cov.design.points)
    np.savetxt(path, cov.values, fmt="%.17e", delimiter=",",
               header=header, comments="")
