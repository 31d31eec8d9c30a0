"""Fisher information for the trend and range of a correlated process.

The model observed on a design is Gaussian with constant unknown trend
``theta`` and covariance matrix ``C`` depending on a range parameter
``r``. The information the design carries about each parameter is

    m_theta = 1' C^{-1} 1
    m_r     = 0.5 * trace(C^{-1} dC/dr C^{-1} dC/dr)

``m_theta`` is computed with a single linear solve and ``m_r`` with one
solve against the derivative matrix. For the exponential family both
have closed forms, kept here as independent cross-checks:

    m_theta = 1 + sum_i (e^{r d_i} - 1) / (e^{r d_i} + 1)
    m_r     = sum_i d_i^2 (e^{2 r d_i} + 1) / (e^{2 r d_i} - 1)^2

with ``d_i`` the gaps between consecutive points. The eigenvalue
bounds ``n / lambda_max <= m_theta <= n / lambda_min`` sandwich the
trend information for any positive definite covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .errors import InvalidParameterError, SingularMatrixError
from .kernels import Family, Kernel, evaluate_array
from .matalg import CovMatrix, Design, build, eig_extremes

__all__ = [
    "FisherReport",
    "m_theta",
    "m_theta_ou",
    "m_theta_ou_equispaced",
    "m_r",
    "m_r_ou",
    "derivative_array",
    "cov_derivative_r",
    "bounds",
    "effectiveness",
    "m_theta_two_point_variogram",
    "report",
]

_ANALYTIC_DERIVATIVE = frozenset(
    {Family.OU, Family.NUGGET_OU, Family.MULTI_JUMP_EXP, Family.POWER_EXP}
)


@dataclass(frozen=True)
class FisherReport:
    """Information summary of one (kernel, design) pair."""

    m_theta: float
    m_r: float
    lower_bound: float
    upper_bound: float
    n: int
    distances: tuple[float, ...]


def _solve_pos(values: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        factor = linalg.cho_factor(values, lower=True)
    except linalg.LinAlgError as exc:
        raise SingularMatrixError(
            f"covariance matrix is singular or indefinite: {exc}"
        ) from None
    return linalg.cho_solve(factor, rhs)


def m_theta(cov: CovMatrix) -> float:
    """Trend information ``1' C^{-1} 1`` via one linear solve."""
    return float(_solve_pos(cov.values, np.ones(cov.n)).sum())


def m_theta_ou(r: float, distances) -> float:
    """Closed-form trend information of the exponential kernel.

    Valid for arbitrary (not necessarily equal) consecutive gaps.
    """
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0.0) or r <= 0.0:
        raise InvalidParameterError("closed form needs r > 0 and positive gaps")
    e = np.exp(r * d)
    return float(1.0 + np.sum((e - 1.0) / (e + 1.0)))


def m_theta_ou_equispaced(n: int, r: float, d: float) -> float:
    """Equispaced special case ``(2 - n + n e^{rd}) / (1 + e^{rd})``."""
    if n < 2:
        raise InvalidParameterError("need at least two points")
    e = math.exp(r * d)
    return (2.0 - n + n * e) / (1.0 + e)


def derivative_array(kernel: Kernel, lags: np.ndarray) -> np.ndarray:
    """Entrywise derivative of the covariance in ``r`` at the given lags.

    Analytic for the exponential families, where every off-diagonal
    entry is ``h * sigma2 * exp(-r * d**p)`` with an r-free height, so
    the derivative is ``-d**p`` times the entry. Other families fall
    back to central differences with step ``1e-6 * r``. The triangular
    kernel is only one-sidedly differentiable at ``r = 2``, so that
    point is rejected.
    """
    if kernel.family in _ANALYTIC_DERIVATIVE:
        return -(lags**kernel.p) * evaluate_array(kernel, lags)
    if kernel.family is Family.NATHER_LINEAR and kernel.r == 2.0:
        raise InvalidParameterError(
            "triangular kernel is not differentiable in r at r = 2"
        )
    h = 1e-6 * kernel.r
    hi = evaluate_array(replace(kernel, r=kernel.r + h), lags)
    lo = evaluate_array(replace(kernel, r=kernel.r - h), lags)
    return (hi - lo) / (2.0 * h)


def cov_derivative_r(kernel: Kernel, design: Design) -> np.ndarray:
    """Derivative matrix ``dC/dr`` on a design; see ``derivative_array``."""
    return derivative_array(kernel, design.lag_matrix())


def m_r(cov: CovMatrix) -> float:
    """Range information ``0.5 tr{(C^{-1} dC/dr)^2}``."""
    deriv = cov_derivative_r(cov.kernel, cov.design)
    s = _solve_pos(cov.values, deriv)
    return float(0.5 * np.einsum("ij,ji->", s, s))


def m_r_ou(r: float, distances) -> float:
    """Closed-form range information of the exponential kernel."""
    d = np.asarray(distances, dtype=float)
    if np.any(d <= 0.0) or r <= 0.0:
        raise InvalidParameterError("closed form needs r > 0 and positive gaps")
    e2 = np.exp(2.0 * r * d)
    return float(np.sum(d**2 * (e2 + 1.0) / (e2 - 1.0) ** 2))


def bounds(cov: CovMatrix) -> tuple[float, float]:
    """Eigenvalue sandwich ``(n / lambda_max, n / lambda_min)``."""
    lo, hi = eig_extremes(cov.values)
    if lo <= 0.0:
        raise SingularMatrixError(
            f"matrix is not positive definite (min eigenvalue {lo:.3e})"
        )
    return cov.n / hi, cov.n / lo


def effectiveness(kernel_c: Kernel, kernel_1: Kernel, design: Design) -> tuple[float, float]:
    """Information ratios of a jump kernel against its no-jump reference.

    Returns ``(m_theta_c / m_theta_1, m_r_c / m_r_1)``. Removing
    correlation helps the trend and hurts the range, so the first ratio
    is above one and the second below one for a genuine jump.
    """
    cov_c = build(kernel_c, design)
    cov_1 = build(kernel_1, design)
    return (
        m_theta(cov_c) / m_theta(cov_1),
        m_r(cov_c) / m_r(cov_1),
    )


def m_theta_two_point_variogram(gamma_d: float) -> float:
    """Trend information of a two-point design from its variogram value.

    For a unit-sill model observed at two points a distance ``d``
    apart, ``m_theta = 2 / (2 - gamma(d))``. The value must stay below
    the doubled sill.
    """
    if gamma_d >= 2.0:
        raise InvalidParameterError(
            f"variogram value must be below 2, got {gamma_d}"
        )
    return 2.0 / (2.0 - gamma_d)


def report(kernel: Kernel, design: Design) -> FisherReport:
    """Full information report for one kernel on one design."""
    cov = build(kernel, design)
    lb, ub = bounds(cov)
    return FisherReport(
        m_theta=m_theta(cov),
        m_r=m_r(cov),
        lower_bound=lb,
        upper_bound=ub,
        n=design.n,
        distances=design.distances,
    )
