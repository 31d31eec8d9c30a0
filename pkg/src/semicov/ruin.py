"""Monte Carlo ruin probabilities for a surplus with correlated gains.

The surplus starts at capital ``u`` and moves by one correlated
increment per period; ruin means dropping strictly below zero at some
period. With a fixed seed the increments are a deterministic function
of the replicate index, so estimates for different capitals are
coupled on common paths and the estimated ruin probability is exactly
monotone in ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, MismatchedConfigurationError
from .forecast import conditional_tail_increments
from .kernels import Kernel
from .simulate import sample_increments

__all__ = ["RuinEstimate", "ruin_probability", "conditional_ruin", "ruin_quotient"]


@dataclass(frozen=True)
class RuinEstimate:
    """Estimated ruin curve over a finite horizon.

    ``psi[t - 1]`` estimates the probability of ruin by period ``t``;
    the curve is nondecreasing by construction. ``first_ruin_counts``
    histograms the first ruin period across replicates (replicates
    that never ruin are absent from it).
    """

    u: float
    horizon: int
    replicates: int
    psi: np.ndarray
    first_ruin_counts: np.ndarray
    seed: int

    def __post_init__(self):
        self.psi.setflags(write=False)
        self.first_ruin_counts.setflags(write=False)


def _estimate_from_paths(tail_increments: np.ndarray, start_level: float,
                         u: float, seed: int) -> RuinEstimate:
    replicates, horizon = tail_increments.shape
    levels = start_level + np.cumsum(tail_increments, axis=1)
    ruined = levels < 0.0
    ever = ruined.any(axis=1)
    first = np.where(ever, ruined.argmax(axis=1), horizon)
    counts = np.bincount(first[ever], minlength=horizon)
    psi = np.cumsum(counts) / replicates
    return RuinEstimate(
        u=u, horizon=horizon, replicates=replicates,
        psi=psi, first_ruin_counts=counts, seed=seed,
    )


def ruin_probability(kernel: Kernel, u: float, horizon: int, replicates: int,
                     seed: int, workers: int = 1) -> RuinEstimate:
    """Estimate ruin probabilities by every period up to the horizon."""
    if u < 0.0:
        raise InvalidParameterError("initial capital must be nonnegative")
    if horizon < 1:
        raise InvalidParameterError("horizon must be at least one period")
    paths = sample_increments(kernel, horizon, replicates, seed, workers=workers)
    return _estimate_from_paths(paths.increments, u, u, seed)


def conditional_ruin(kernel: Kernel, observed_surplus, horizon: int,
                     replicates: int, seed: int, workers: int = 1) -> RuinEstimate:
    """Ruin over the next ``horizon`` periods given an observed surplus.

    ``observed_surplus`` starts at the initial capital ``U_0 = u`` and
    must be nonnegative throughout (no ruin has happened yet). The
    future increments are drawn from their conditional law given the
    observed ones, as in the forecast module.
    """
    surplus = np.asarray(observed_surplus, dtype=float)
    if surplus.ndim != 1 or surplus.size < 2:
        raise InvalidParameterError(
            "need the observed surplus including its starting capital"
        )
    if np.any(surplus < 0.0):
        raise InvalidParameterError("observed surplus already hit ruin")
    increments = np.diff(surplus)
    tails = conditional_tail_increments(
        kernel, increments, horizon, replicates, seed, workers=workers
    )
    return _estimate_from_paths(tails, float(surplus[-1]), float(surplus[0]), seed)


def ruin_quotient(numerator: RuinEstimate, denominator: RuinEstimate) -> np.ndarray:
    """Per-period ratio of two ruin curves, NaN where the denominator is zero.

    Both estimates must share capital, horizon and replicate count;
    anything else is a configuration mismatch, not a comparison.
    """
    same = (
        numerator.u == denominator.u
        and numerator.horizon == denominator.horizon
        and numerator.replicates == denominator.replicates
    )
    if not same:
        raise MismatchedConfigurationError(
            "ruin estimates differ in capital, horizon or replicate count"
        )
    out = np.full(numerator.horizon, np.nan)
    nonzero = denominator.psi > 0.0
    out[nonzero] = numerator.psi[nonzero] / denominator.psi[nonzero]
    return out
