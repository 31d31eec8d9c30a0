"""Conditional forecasting of a correlated walk.

The observed walk is differenced back to increments, the increments
are whitened with the Cholesky factor of their covariance, and fresh
standard normals are appended for the horizon. Back-transforming with
the Cholesky factor of the enlarged covariance reproduces the observed
increments exactly (the leading block of the enlarged factor is the
factor of the leading block, by uniqueness of the factorization) and
draws the horizon increments from their exact conditional law given
the observations.

The observed walk is taken as zero based: entry ``t`` is the sum of
the first ``t + 1`` increments. A series of price levels should be
differenced (or shifted) by the caller first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from ._rng import fill_normals
from .errors import DimensionMismatchError, InvalidParameterError
from .kernels import Kernel
from .simulate import correlated_cholesky

__all__ = ["ForecastResult", "conditional_forecast"]


@dataclass(frozen=True)
class ForecastResult:
    """Per-step forecast summary over the horizon.

    ``point`` is the per-step median across replicates; ``mean`` is
    the per-step average. The band is the empirical
    ``(alpha/2, 1 - alpha/2)`` quantile pair.
    """

    steps: np.ndarray
    point: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    replicates: int
    last_observed: float


def conditional_tail_increments(
    kernel: Kernel, increments, horizon: int, replicates: int, seed: int,
    workers: int = 1,
) -> np.ndarray:
    """Replicated horizon increments conditional on the observed ones.

    Returns an array of shape ``(replicates, horizon)``. Internal
    building block shared by the forecast and the conditional ruin
    estimate.
    """
    x = np.asarray(increments, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise DimensionMismatchError("need a one-dimensional series of increments")
    if horizon < 1:
        raise DimensionMismatchError("horizon must be at least one step")
    if replicates < 1:
        raise InvalidParameterError("need at least one replicate")
    m = x.size
    full = correlated_cholesky(kernel, m + horizon)
    lead = full[:m, :m]
    z = solve_triangular(lead, x, lower=True)
    base = full[m:, :m] @ z
    tail_noise = fill_normals(seed, replicates, horizon, workers=workers)
    return base[None, :] + tail_noise @ full[m:, m:].T


def conditional_forecast(
    kernel: Kernel,
    observed_walk,
    horizon: int,
    replicates: int,
    seed: int,
    alpha: float = 0.05,
    workers: int = 1,
) -> ForecastResult:
    """Forecast the walk ``horizon`` steps past its last observation.

    ``observed_walk`` is the zero-based cumulative series (see module
    docstring). A horizon of zero yields an empty, trivially
    consistent result.
    """
    walk = np.asarray(observed_walk, dtype=float)
    if walk.ndim != 1 or walk.size < 1:
        raise DimensionMismatchError("need a one-dimensional observed walk")
    if horizon < 0:
        raise DimensionMismatchError("horizon must be nonnegative")
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError("alpha must lie in (0, 1)")
    last = float(walk[-1])
    if horizon == 0:
        empty = np.empty(0)
        return ForecastResult(
            steps=np.empty(0, dtype=int), point=empty, mean=empty,
            lower=empty, upper=empty, alpha=alpha, replicates=replicates,
            last_observed=last,
        )
    x = np.diff(walk, prepend=0.0)
    tails = conditional_tail_increments(
        kernel, x, horizon, replicates, seed, workers=workers
    )
    levels = last + np.cumsum(tails, axis=1)
    lower, point, upper = np.quantile(
        levels, [alpha / 2.0, 0.5, 1.0 - alpha / 2.0], axis=0
    )
    return ForecastResult(
        steps=np.arange(1, horizon + 1),
        point=point,
        mean=levels.mean(axis=0),
        lower=lower,
        upper=upper,
        alpha=alpha,
        replicates=replicates,
        last_observed=last,
    )
