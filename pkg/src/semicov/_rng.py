"""Replicate-keyed random number generation.

Every stochastic routine in the package derives the randomness of
replicate ``i`` from ``numpy``'s seed sequence of ``[seed_base, i]``.
That makes each replicate's stream independent of execution order and
of how work is split across workers, so results are reproducible
byte for byte for a given seed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

__all__ = ["replicate_rng", "fill_normals"]


def replicate_rng(seed_base: int, index: int) -> np.random.Generator:
    """Generator for one replicate, keyed by ``(seed_base, index)``."""
    return np.random.default_rng([seed_base, index])


def fill_normals(seed_base: int, replicates: int, length: int,
                 workers: int = 1) -> np.ndarray:
    """Matrix of standard normals, one replicate-keyed row per replicate."""
    out = np.empty((replicates, length))

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[i] = replicate_rng(seed_base, i).standard_normal(length)

    if workers <= 1 or replicates < 2:
        fill(0, replicates)
        return out
    bounds = np.linspace(0, replicates, min(workers, replicates) + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda se: fill(*se), zip(bounds[:-1], bounds[1:])))
    return out
