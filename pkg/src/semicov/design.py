"""Grid search for information-optimal designs.

A design on ``[a, b]`` is represented by its vector of consecutive
gaps, each a positive multiple of the grid step, with total length at
most ``b - a`` and the first point anchored at ``a``. Small problems
are enumerated exhaustively (the number of candidate gap vectors is
``C(m, n-1)`` for ``m`` grid steps); past the evaluation cap the search
falls back to seeded coordinate descent with restarts.

Candidates whose covariance matrix is not numerically positive
definite are treated as infeasible rather than scored, so kernels with
limited validity (piecewise bands, truncated supports) are searched
honestly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InfeasibleDesignError, InvalidParameterError
from .fisher import derivative_array
from .kernels import Kernel, evaluate_array, psi_of
from .matalg import Design

__all__ = [
    "Criterion",
    "SearchResult",
    "ProductReference",
    "search",
    "product_design",
    "geometric_progressive",
    "psi_budget",
]

TIE_TOL = 1e-10
_CHUNK = 32768
_TIE_CAP = 20000


class Criterion(str, Enum):
    """Which information quantity the search maximizes."""

    THETA = "theta"
    R = "r"
    PRODUCT = "product"


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one design search.

    ``ties`` holds every gap vector whose value is within ``TIE_TOL``
    of the best (capped at a large constant), with ``best`` the
    lexicographically smallest of them. ``trace`` records best-so-far
    improvements in evaluation order, not every candidate visited.
    ``collapsed`` is set when some best gap sits at the minimal grid
    step and the criterion still increases toward zero gap.
    """

    best: Design
    best_value: float
    criterion: Criterion
    collapsed: bool
    ties: tuple[tuple[float, ...], ...]
    trace: tuple[tuple[tuple[float, ...], float], ...]
    grid_step: float
    evaluations: int
    exhaustive: bool


@dataclass(frozen=True)
class ProductReference:
    """Closed-form reference design for the product criterion."""

    design: Design | None
    collapsed: bool


def _psd_mask(stack: np.ndarray) -> np.ndarray:
    """True for every matrix in the stack with a working Cholesky."""
    try:
        np.linalg.cholesky(stack)
        return np.ones(stack.shape[0], dtype=bool)
    except np.linalg.LinAlgError:
        pass
    mask = np.zeros(stack.shape[0], dtype=bool)
    for i in range(stack.shape[0]):
        try:
            np.linalg.cholesky(stack[i])
            mask[i] = True
        except np.linalg.LinAlgError:
            mask[i] = False
    return mask


def _candidate_values(kernel: Kernel, criterion: Criterion,
                      dists: np.ndarray, start: float) -> np.ndarray:
    """Criterion values for a batch of gap vectors; -inf when infeasible."""
    count, k = dists.shape
    pts = np.concatenate([np.zeros((count, 1)), np.cumsum(dists, axis=1)], axis=1)
    pts += start
    lags = np.abs(pts[:, :, None] - pts[:, None, :])
    cov = evaluate_array(kernel, lags)
    values = np.full(count, -np.inf)
    ok = np.flatnonzero(_psd_mask(cov))
    if ok.size == 0:
        return values
    cov_ok = cov[ok]
    ones = np.ones((ok.size, k + 1, 1))
    if criterion in (Criterion.THETA, Criterion.PRODUCT):
        mt = np.linalg.solve(cov_ok, ones).sum(axis=(1, 2))
    if criterion in (Criterion.R, Criterion.PRODUCT):
        deriv = derivative_array(kernel, lags[ok])
        s = np.linalg.solve(cov_ok, deriv)
        mr = 0.5 * np.einsum("kij,kji->k", s, s)
    if criterion is Criterion.THETA:
        values[ok] = mt
    elif criterion is Criterion.R:
        values[ok] = mr
    else:
        values[ok] = mt * mr
    return values


def _value_of(kernel, criterion, dist_vector, start) -> float:
    return float(
        _candidate_values(kernel, criterion,
                          np.asarray([dist_vector], dtype=float), start)[0]
    )


class _Tracker:
    """Keeps the running best, the tie set and the improvement trace."""

    def __init__(self):
        self.best_value = -np.inf
        self.ties: list[tuple[tuple[float, ...], float]] = []
        self.trace: list[tuple[tuple[float, ...], float]] = []
        self.evaluations = 0

    def offer(self, dists: np.ndarray, values: np.ndarray) -> None:
        self.evaluations += len(values)
        top = values.max(initial=-np.inf)
        if top > self.best_value + TIE_TOL:
            self.best_value = top
            self.ties = [t for t in self.ties if t[1] >= top - TIE_TOL]
            self.trace.append((tuple(dists[int(np.argmax(values))]), float(top)))
        elif top > self.best_value:
            self.best_value = top
        near = np.flatnonzero(
            np.isfinite(values) & (values >= self.best_value - TIE_TOL)
        )
        for i in near:
            if len(self.ties) >= _TIE_CAP:
                break
            self.ties.append((tuple(float(x) for x in dists[i]), float(values[i])))

    def finish(self) -> tuple[tuple[tuple[float, ...], ...], tuple[float, ...]]:
        final = sorted(
            {t[0] for t in self.ties if t[1] >= self.best_value - TIE_TOL}
        )
        if not final:
            raise InfeasibleDesignError(
                "no candidate design produced a positive definite covariance"
            )
        return tuple(final), final[0]


def _exhaustive(kernel, criterion, m, n, step, start, tracker) -> None:
    combos = itertools.combinations(range(1, m + 1), n - 1)
    while True:
        block = list(itertools.islice(combos, _CHUNK))
        if not block:
            break
        cum = np.asarray(block, dtype=float)
        dists = np.diff(cum, axis=1, prepend=0.0) * step
        tracker.offer(dists, _candidate_values(kernel, criterion, dists, start))


def _descent(kernel, criterion, m, n, step, start, seed, restarts, tracker) -> None:
    rng = np.random.default_rng([seed, 0])
    k = n - 1
    starts = [np.full(k, m // k, dtype=int)]
    for _ in range(restarts):
        parts = rng.multinomial(m - k, np.full(k, 1.0 / k))
        starts.append(parts + 1)
    for idx in starts:
        idx = idx.copy()
        improved = True
        while improved:
            improved = False
            for coord in range(k):
                budget = m - int(idx.sum() - idx[coord])
                if budget < 1:
                    continue
                sweep = np.tile(idx, (budget, 1)).astype(float)
                sweep[:, coord] = np.arange(1, budget + 1)
                dists = sweep * step
                values = _candidate_values(kernel, criterion, dists, start)
                tracker.offer(dists, values)
                best_here = int(np.argmax(values)) + 1
                if values[best_here - 1] > -np.inf and best_here != idx[coord]:
                    current = _value_of(kernel, criterion, idx * step, start)
                    if values[best_here - 1] > current + TIE_TOL:
                        idx[coord] = best_here
                        improved = True


def search(
    kernel: Kernel,
    space: tuple[float, float],
    n: int,
    criterion: Criterion | str = Criterion.THETA,
    grid_step: float | None = None,
    seed: int = 0,
    exhaustive_cap: int = 10_000_000,
    restarts: int = 5,
) -> SearchResult:
    """Maximize an information criterion over gap vectors on a grid.

    The grid step defaults to ``(b - a) / 200``. Exhaustive
    enumeration is used while the candidate count stays within
    ``exhaustive_cap``, otherwise seeded coordinate descent runs from
    an equispaced start plus ``restarts`` random ones.
    """
    criterion = Criterion(criterion)
    a, b = float(space[0]), float(space[1])
    if not a < b:
        raise InvalidParameterError("design space must satisfy a < b")
    if n < 2:
        raise InvalidParameterError("need at least two design points")
    span = b - a
    if grid_step is None:
        grid_step = span / 200.0
    if grid_step <= 0.0 or grid_step > span:
        raise InvalidParameterError("grid step must lie in (0, b - a]")
    m = int(math.floor(span / grid_step + 1e-9))
    if n - 1 > m:
        raise InfeasibleDesignError(
            f"{n} points cannot fit in [{a}, {b}] with grid step {grid_step}"
        )

    tracker = _Tracker()
    exhaustive = math.comb(m, n - 1) <= exhaustive_cap
    if exhaustive:
        _exhaustive(kernel, criterion, m, n, grid_step, a, tracker)
    else:
        _descent(kernel, criterion, m, n, grid_step, a, seed, restarts, tracker)

    ties, best_dists = tracker.finish()
    collapsed = False
    best_arr = np.asarray(best_dists)
    for coord in range(n - 1):
        at_min = abs(best_arr[coord] - grid_step) <= 1e-12 * max(grid_step, 1.0)
        if not at_min:
            continue
        probe = best_arr.copy()
        probe[coord] = 2.0 * grid_step
        if probe.sum() > span + 1e-12:
            continue
        slope = (_value_of(kernel, criterion, probe, a) - tracker.best_value) / grid_step
        if slope < 0.0:
            collapsed = True
            break

    return SearchResult(
        best=Design.from_distances(best_dists, start=a, space=(a, b)),
        best_value=float(tracker.best_value),
        criterion=criterion,
        collapsed=collapsed,
        ties=ties,
        trace=tuple(tracker.trace),
        grid_step=float(grid_step),
        evaluations=tracker.evaluations,
        exhaustive=exhaustive,
    )


def product_design(space: tuple[float, float], n: int) -> ProductReference:
    """Reference design for the product criterion ``m_theta * m_r``.

    Two-point designs collapse (the product keeps growing as the gap
    shrinks), so no finite best design exists and ``design`` is None.
    For more points the reference is the equidistant design filling the
    space. This is the closed-form answer; ``search`` with the PRODUCT
    criterion reports whatever the grid actually maximizes.
    """
    a, b = float(space[0]), float(space[1])
    if not a < b:
        raise InvalidParameterError("design space must satisfy a < b")
    if n < 2:
        raise InvalidParameterError("need at least two design points")
    if n == 2:
        return ProductReference(design=None, collapsed=True)
    gap = (b - a) / (n - 1)
    return ProductReference(
        design=Design.equispaced(n, gap, start=a, space=(a, b)), collapsed=False
    )


def geometric_progressive(space: tuple[float, float], n: int, ratio: float) -> Design:
    """Design whose gaps follow a geometric progression filling the space."""
    if ratio <= 0.0:
        raise InvalidParameterError("ratio must be positive")
    if n < 2:
        raise InvalidParameterError("need at least two design points")
    a, b = float(space[0]), float(space[1])
    if not a < b:
        raise InvalidParameterError("design space must satisfy a < b")
    raw = ratio ** np.arange(n - 1)
    gaps = raw * (b - a) / raw.sum()
    return Design.from_distances(gaps, start=a, space=(a, b))


def psi_budget(kernel: Kernel, space: tuple[float, float]) -> float:
    """Log-representation budget of the space, ``psi(b - a)``."""
    a, b = float(space[0]), float(space[1])
    if not a < b:
        raise InvalidParameterError("design space must satisfy a < b")
    return psi_of(kernel)(b - a)
