"""Semicontinuous covariance kernels and variogram models on the line.

This module is the catalog of stationary covariance structures used
everywhere else in the package. All kernels are isotropic in the lag
``d = |t - s|`` and scaled so that the lag-zero variance is ``sigma2``
(for the variogram families the lag-zero variance is the sill
``tau2 + sigma2``).

The covariance families share a common shape: a value of ``sigma2`` at
lag zero, an optional downward jump immediately after zero (a nugget),
optional further downward jumps at positive lags, and a nonincreasing
tail that vanishes at large lags. ``validate_abc`` checks exactly these
properties on a grid: normalization and nonnegativity, monotone
decrease with almost-everywhere convexity, and decay to zero.

Every kernel admits the log representation

    psi(d) = -log(C(d) / C(0))

which is nonnegative, vanishes at zero and inherits jumps from C.
For the plain exponential kernel psi is linear, ``psi(d) = r * d``,
which is what makes that family analytically convenient.

Examples
--------
>>> k = nugget_ou(c=0.9, r=0.1)
>>> evaluate(k, 0.0)
1.0
>>> evaluate(k, 1.0)  # 0.9 * exp(-0.1)
0.8143536953592304
>>> psi_of(k)(1.0)  # 0.1 - log(0.9)
0.20536051565782628
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "Family",
    "Kernel",
    "AbcReport",
    "ou",
    "nugget_ou",
    "multi_jump_exp",
    "power_exp",
    "step",
    "nather_linear",
    "variogram_linear",
    "variogram_spherical",
    "variogram_exponential",
    "evaluate",
    "evaluate_array",
    "variogram",
    "psi_of",
    "jump_lags",
    "lag0_variance",
    "no_nugget_counterpart",
    "validate_abc",
    "from_mapping",
    "from_config",
    "to_mapping",
]


class Family(str, Enum):
    """Identifies the functional form of a kernel."""

    OU = "ou"
    NUGGET_OU = "nugget_ou"
    MULTI_JUMP_EXP = "multi_jump_exp"
    POWER_EXP = "power_exp"
    STEP = "step"
    NATHER_LINEAR = "nather_linear"
    VARIOGRAM_LINEAR = "variogram_linear"
    VARIOGRAM_SPHERICAL = "variogram_spherical"
    VARIOGRAM_EXPONENTIAL = "variogram_exponential"


_COVARIANCE_FAMILIES = frozenset(
    {
        Family.OU,
        Family.NUGGET_OU,
        Family.MULTI_JUMP_EXP,
        Family.POWER_EXP,
        Family.STEP,
        Family.NATHER_LINEAR,
    }
)
_VARIOGRAM_FAMILIES = frozenset(
    {
        Family.VARIOGRAM_LINEAR,
        Family.VARIOGRAM_SPHERICAL,
        Family.VARIOGRAM_EXPONENTIAL,
    }
)
_CUTOFF_FAMILIES = frozenset({Family.OU, Family.NUGGET_OU, Family.POWER_EXP})


@dataclass(frozen=True)
class Kernel:
    """Immutable description of one covariance or variogram model.

    Parameters
    ----------
    family:
        Which functional form the remaining fields parameterize.
    sigma2:
        Scale of the lag-zero variance (the partial sill for the
        variogram families). Must be positive.
    r:
        Range or decay parameter. For ``STEP`` it is the support cutoff
        (the constant band covers ``0 < d <= r``), for ``NATHER_LINEAR``
        the lag at which the linear covariance reaches zero, and for
        ``VARIOGRAM_LINEAR`` it is unused.
    c:
        First jump height immediately after lag zero, in ``(0, 1]``.
        The exact value ``c = 0`` is additionally accepted for
        ``NUGGET_OU`` as the independence limit (pure white noise).
    p:
        Power-exponential exponent, used only by ``POWER_EXP``.
    jumps:
        Further downward jumps for ``MULTI_JUMP_EXP`` as
        ``(lag_threshold, height)`` pairs. Bands are half open: the
        height applies on ``[threshold, next_threshold)``, so the
        threshold itself already takes the lower height. Thresholds
        must be strictly increasing and heights strictly decreasing,
        starting below ``c``.
    tau2:
        Nugget variance of the variogram families. Nonnegative.
    cutoff:
        Optional support truncation for ``OU``, ``NUGGET_OU`` and
        ``POWER_EXP``: the covariance is zero for ``d >= cutoff``.
    """

    family: Family
    sigma2: float = 1.0
    r: float = 1.0
    c: float = 1.0
    p: float = 1.0
    jumps: tuple[tuple[float, float], ...] = ()
    tau2: float = 0.0
    cutoff: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(
            self, "jumps", tuple((float(t), float(h)) for t, h in self.jumps)
        )
        _validate_fields(self)

    def __call__(self, d):
        """Evaluate the covariance at lag(s) ``d``."""
        if np.isscalar(d):
            return evaluate(self, d)
        return evaluate_array(self, np.asarray(d, dtype=float))


def _validate_fields(k: Kernel) -> None:
    if not (k.sigma2 > 0.0) or not math.isfinite(k.sigma2):
        raise InvalidParameterError(f"sigma2 must be positive, got {k.sigma2}")
    if k.tau2 < 0.0 or not math.isfinite(k.tau2):
        raise InvalidParameterError(f"tau2 must be nonnegative, got {k.tau2}")

    needs_r = k.family is not Family.VARIOGRAM_LINEAR
    if needs_r and (not math.isfinite(k.r) or k.r <= 0.0):
        raise InvalidParameterError(
            f"{k.family.value} requires a positive range parameter r, got {k.r}"
        )

    if k.family is Family.NUGGET_OU:
        if not 0.0 <= k.c <= 1.0:
            raise InvalidParameterError(f"jump height c must lie in [0, 1], got {k.c}")
    elif k.family in (Family.MULTI_JUMP_EXP, Family.POWER_EXP, Family.STEP):
        if not 0.0 < k.c <= 1.0:
            raise InvalidParameterError(f"jump height c must lie in (0, 1], got {k.c}")

    if k.family is Family.POWER_EXP and k.p <= 0.0:
        raise InvalidParameterError(f"power exponent p must be positive, got {k.p}")

    if k.jumps and k.family is not Family.MULTI_JUMP_EXP:
        raise InvalidParameterError(
            f"jumps are only meaningful for multi_jump_exp, got family {k.family.value}"
        )
    if k.family is Family.MULTI_JUMP_EXP:
        prev_t, prev_h = 0.0, k.c
        for t, h in k.jumps:
            if t <= prev_t:
                raise InvalidParameterError(
                    f"jump thresholds must be strictly increasing, got {t} after {prev_t}"
                )
            if not 0.0 < h < prev_h:
                raise InvalidParameterError(
                    f"jump heights must be strictly decreasing in (0, 1), "
                    f"got {h} after {prev_h}"
                )
            prev_t, prev_h = t, h

    if k.cutoff is not None:
        if k.family not in _CUTOFF_FAMILIES:
            raise InvalidParameterError(
                f"cutoff is not supported for family {k.family.value}"
            )
        if not (k.cutoff > 0.0):
            raise InvalidParameterError(f"cutoff must be positive, got {k.cutoff}")


def ou(r: float, sigma2: float = 1.0, cutoff: float | None = None) -> Kernel:
    """Exponential kernel ``sigma2 * exp(-r d)``."""
    return Kernel(Family.OU, sigma2=sigma2, r=r, cutoff=cutoff)


def nugget_ou(c: float, r: float, sigma2: float = 1.0, cutoff: float | None = None) -> Kernel:
    """Exponential kernel with one jump at the origin.

    ``C(0) = sigma2`` and ``C(d) = c * sigma2 * exp(-r d)`` for
    ``d > 0``; the implied nugget variance is ``(1 - c) * sigma2``.
    """
    return Kernel(Family.NUGGET_OU, sigma2=sigma2, r=r, c=c, cutoff=cutoff)


def multi_jump_exp(
    c: float,
    jumps: Sequence[tuple[float, float]],
    r: float,
    sigma2: float = 1.0,
) -> Kernel:
    """Exponential kernel with several downward jumps.

    The height multiplier is ``c`` on ``(0, t_1)`` and ``h_k`` on
    ``[t_k, t_{k+1})`` for each ``(t_k, h_k)`` in ``jumps``.
    """
    return Kernel(Family.MULTI_JUMP_EXP, sigma2=sigma2, r=r, c=c, jumps=tuple(jumps))


def power_exp(
    p: float,
    r: float = 1.0,
    c: float = 1.0,
    sigma2: float = 1.0,
    cutoff: float | None = None,
) -> Kernel:
    """Power exponential kernel ``c * sigma2 * exp(-r d**p)`` for ``d > 0``."""
    return Kernel(Family.POWER_EXP, sigma2=sigma2, r=r, c=c, p=p, cutoff=cutoff)


def step(c: float, d_cut: float, sigma2: float = 1.0) -> Kernel:
    """Piecewise constant kernel.

    ``sigma2`` at lag zero, ``c * sigma2`` on ``0 < d <= d_cut`` and
    zero beyond. Note the band is closed on the right.
    """
    return Kernel(Family.STEP, sigma2=sigma2, r=d_cut, c=c)


def nather_linear(r: float, sigma2: float = 1.0) -> Kernel:
    """Triangular kernel ``sigma2 * (1 - d / r)`` for ``d < r``, else zero."""
    return Kernel(Family.NATHER_LINEAR, sigma2=sigma2, r=r)


def variogram_linear(tau2: float, sigma2: float) -> Kernel:
    """Linear variogram ``gamma(d) = tau2 + sigma2 * d`` for ``d > 0``."""
    return Kernel(Family.VARIOGRAM_LINEAR, sigma2=sigma2, tau2=tau2)


def variogram_spherical(tau2: float, sigma2: float, r: float) -> Kernel:
    """Spherical variogram with nugget ``tau2``, partial sill ``sigma2``, range ``r``."""
    return Kernel(Family.VARIOGRAM_SPHERICAL, sigma2=sigma2, tau2=tau2, r=r)


def variogram_exponential(tau2: float, sigma2: float, r: float) -> Kernel:
    """Exponential variogram ``tau2 + sigma2 * (1 - exp(-r d))`` for ``d > 0``."""
    return Kernel(Family.VARIOGRAM_EXPONENTIAL, sigma2=sigma2, tau2=tau2, r=r)


def lag0_variance(kernel: Kernel) -> float:
    """Variance at lag zero: ``sigma2``, or the sill for variogram families."""
    if kernel.family in _VARIOGRAM_FAMILIES:
        return kernel.tau2 + kernel.sigma2
    return kernel.sigma2


def _height_array(kernel: Kernel, d: np.ndarray) -> np.ndarray:
    """Piecewise jump-height multiplier for positive lags."""
    h = np.full(d.shape, kernel.c, dtype=float)
    for t, height in kernel.jumps:
        h[d >= t] = height
    return h


def evaluate_array(kernel: Kernel, d: np.ndarray) -> np.ndarray:
    """Vectorized covariance evaluation at nonnegative lags ``d``."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0.0) or np.any(~np.isfinite(d)):
        raise InvalidParameterError("lags must be finite and nonnegative")

    fam = kernel.family
    s2 = kernel.sigma2
    if fam is Family.OU:
        out = s2 * np.exp(-kernel.r * d)
    elif fam is Family.NUGGET_OU:
        out = kernel.c * s2 * np.exp(-kernel.r * d)
    elif fam is Family.MULTI_JUMP_EXP:
        out = _height_array(kernel, d) * s2 * np.exp(-kernel.r * d)
    elif fam is Family.POWER_EXP:
        out = kernel.c * s2 * np.exp(-kernel.r * d**kernel.p)
    elif fam is Family.STEP:
        out = np.where(d <= kernel.r, kernel.c * s2, 0.0)
    elif fam is Family.NATHER_LINEAR:
        out = np.where(d < kernel.r, s2 * (1.0 - d / kernel.r), 0.0)
    else:
        # Variogram families: stationary conversion C(d) = sill - gamma(d).
        out = (kernel.tau2 + s2) - variogram(kernel, d)

    if kernel.cutoff is not None:
        out = np.where(d >= kernel.cutoff, 0.0, out)
    return np.where(d == 0.0, lag0_variance(kernel), out)


def evaluate(kernel: Kernel, d: float) -> float:
    """Covariance ``C(d)`` at a single nonnegative lag."""
    return float(evaluate_array(kernel, np.asarray([d], dtype=float))[0])


def variogram(kernel: Kernel, d) -> np.ndarray | float:
    """Semivariogram ``gamma(d)`` of the kernel.

    For the variogram families this is the model formula itself. For
    the covariance families it is the stationary identity
    ``gamma(d) = C(0) - C(d)``.
    """
    scalar = np.isscalar(d)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    if np.any(d < 0.0):
        raise InvalidParameterError("lags must be nonnegative")

    fam = kernel.family
    if fam is Family.VARIOGRAM_LINEAR:
        g = kernel.tau2 + kernel.sigma2 * d
    elif fam is Family.VARIOGRAM_SPHERICAL:
        x = np.minimum(d, kernel.r) / kernel.r
        g = kernel.tau2 + kernel.sigma2 * (1.5 * x - 0.5 * x**3)
    elif fam is Family.VARIOGRAM_EXPONENTIAL:
        g = kernel.tau2 + kernel.sigma2 * (1.0 - np.exp(-kernel.r * d))
    else:
        g = lag0_variance(kernel) - evaluate_array(kernel, d)
    g = np.where(d == 0.0, 0.0, g)
    return float(g[0]) if scalar else g


def psi_of(kernel: Kernel) -> Callable[[float], float]:
    """Log representation of the kernel.

    Returns the function ``psi(d) = -log(C(d) / C(0))``, which is zero
    at the origin, nondecreasing and ``inf`` wherever the covariance
    vanishes. For the plain exponential kernel ``psi(d) = r * d``.
    """
    scale = lag0_variance(kernel)

    def psi(d: float) -> float:
        value = evaluate(kernel, d)
        if value <= 0.0:
            return math.inf
        return -math.log(value / scale)

    return psi


def jump_lags(kernel: Kernel) -> tuple[float, ...]:
    """Lags at which the covariance is discontinuous.

    The origin is included whenever there is a nugget style drop
    immediately after lag zero.
    """
    lags: list[float] = []
    fam = kernel.family
    if fam in (Family.NUGGET_OU, Family.POWER_EXP) and kernel.c < 1.0:
        lags.append(0.0)
    if fam is Family.STEP:
        if kernel.c < 1.0:
            lags.append(0.0)
        lags.append(kernel.r)
    if fam is Family.MULTI_JUMP_EXP:
        if kernel.c < 1.0:
            lags.append(0.0)
        lags.extend(t for t, _ in kernel.jumps)
    if fam in _VARIOGRAM_FAMILIES and kernel.tau2 > 0.0:
        lags.append(0.0)
    if kernel.cutoff is not None:
        lags.append(kernel.cutoff)
    return tuple(lags)


def no_nugget_counterpart(kernel: Kernel) -> Kernel:
    """The same kernel with every jump removed.

    Used as the reference model in effectiveness ratios: jump heights
    are raised to one and the variogram nugget is set to zero.
    """
    fam = kernel.family
    if fam in (Family.NUGGET_OU, Family.POWER_EXP, Family.STEP):
        return replace(kernel, c=1.0)
    if fam is Family.MULTI_JUMP_EXP:
        return ou(r=kernel.r, sigma2=kernel.sigma2)
    if fam in _VARIOGRAM_FAMILIES:
        return replace(kernel, tau2=0.0)
    return kernel


# --------------------------------------------------------------------------
# Grid validation of the semicontinuous / convex / vanishing shape


@dataclass(frozen=True)
class AbcReport:
    """Outcome of ``validate_abc`` with witnesses for each failed check."""

    normalized: bool
    nonnegative: bool
    nonincreasing: bool
    convex: bool
    vanishes: bool
    witnesses: Mapping[str, tuple[float, ...]] = field(default_factory=dict)
    d_max: float = 0.0
    cells: int = 0
    tol: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            self.normalized
            and self.nonnegative
            and self.nonincreasing
            and self.convex
            and self.vanishes
        )


def _default_d_max(kernel: Kernel) -> float:
    fam = kernel.family
    if fam in (Family.STEP, Family.NATHER_LINEAR, Family.VARIOGRAM_SPHERICAL):
        return 2.0 * kernel.r
    if fam is Family.VARIOGRAM_LINEAR:
        # The converted covariance sigma2 * (1 - d) crosses zero at d = 1.
        return 2.0
    if fam is Family.MULTI_JUMP_EXP:
        largest = max((t for t, _ in kernel.jumps), default=0.0)
        return max(20.0 / kernel.r, 2.0 * largest)
    if fam is Family.POWER_EXP:
        return (20.0 / kernel.r) ** (1.0 / kernel.p)
    return 20.0 / kernel.r


def validate_abc(
    kernel,
    d_max: float | None = None,
    cells: int = 512,
    tol: float | None = None,
    vanish_tol: float | None = None,
    sigma2: float | None = None,
    jumps: Sequence[float] | None = None,
) -> AbcReport:
    """Check the semicontinuous covariance shape on an evaluation grid.

    Verified conditions: the lag-zero value equals the declared
    variance and the covariance is nonnegative everywhere on the grid;
    the covariance is nonincreasing and discretely convex away from the
    declared jump lags (second differences at least ``-tol``, skipping
    the two grid cells straddling each jump); the covariance has
    decayed below ``vanish_tol`` at ``d_max``.

    ``kernel`` may also be a plain callable mapping an array of lags to
    covariance values, in which case ``sigma2``, ``jumps`` and
    ``d_max`` must describe it explicitly. This keeps the check usable
    for hand-built combinations such as positive mixtures of kernels.

    Always returns a report, never raises on a failed condition.
    """
    if isinstance(kernel, Kernel):
        fn = lambda d: evaluate_array(kernel, d)  # noqa: E731
        sigma2 = lag0_variance(kernel)
        declared = jump_lags(kernel)
        if d_max is None:
            d_max = _default_d_max(kernel)
    else:
        if sigma2 is None or d_max is None:
            raise InvalidParameterError(
                "callable validation needs explicit sigma2 and d_max"
            )
        fn = kernel
        declared = tuple(jumps or ())

    if tol is None:
        tol = 1e-9 * sigma2
    if vanish_tol is None:
        vanish_tol = 1e-6 * sigma2

    grid = np.linspace(0.0, d_max, cells + 1)
    values = np.asarray(fn(grid), dtype=float)

    witnesses: dict[str, tuple[float, ...]] = {}

    normalized = abs(values[0] - sigma2) <= 1e-12 * sigma2
    if not normalized:
        witnesses["normalized"] = (0.0,)

    neg = grid[values < -tol]
    nonnegative = neg.size == 0
    if not nonnegative:
        witnesses["nonnegative"] = tuple(neg[:8])

    increasing = grid[1:][np.diff(values) > tol]
    nonincreasing = increasing.size == 0
    if not nonincreasing:
        witnesses["nonincreasing"] = tuple(increasing[:8])

    second = values[:-2] - 2.0 * values[1:-1] + values[2:]
    mid = grid[1:-1]
    skip = np.zeros(mid.shape, dtype=bool)
    for t in declared:
        # Skip the triples whose span contains the jump; the lower
        # band already owns the threshold itself.
        skip |= (grid[:-2] < t) & (t <= grid[2:])
    bad = mid[(second < -tol) & ~skip]
    convex = bad.size == 0
    if not convex:
        witnesses["convex"] = tuple(bad[:8])

    vanishes = abs(values[-1]) < vanish_tol
    if not vanishes:
        witnesses["vanishes"] = (float(d_max),)

    return AbcReport(
        normalized=normalized,
        nonnegative=nonnegative,
        nonincreasing=nonincreasing,
        convex=convex,
        vanishes=vanishes,
        witnesses=witnesses,
        d_max=float(d_max),
        cells=cells,
        tol=float(tol),
    )


# --------------------------------------------------------------------------
# Config files

_FIELD_NAMES = ("family", "sigma2", "r", "c", "p", "jumps", "tau2", "cutoff")


def from_mapping(data: Mapping) -> Kernel:
    """Build a kernel from a plain mapping (parsed config file)."""
    unknown = set(data) - set(_FIELD_NAMES)
    if unknown:
        raise InvalidParameterError(f"unknown kernel config keys: {sorted(unknown)}")
    if "family" not in data:
        raise InvalidParameterError("kernel config needs a 'family' key")
    try:
        family = Family(str(data["family"]))
    except ValueError:
        raise InvalidParameterError(f"unknown kernel family {data['family']!r}") from None

    kwargs = {}
    for name in ("sigma2", "r", "c", "p", "tau2", "cutoff"):
        if name in data:
            value = data[name]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidParameterError(f"kernel config key {name!r} must be a number")
            kwargs[name] = float(value)
    if "jumps" in data:
        jumps = data["jumps"]
        try:
            kwargs["jumps"] = tuple((float(t), float(h)) for t, h in jumps)
        except (TypeError, ValueError):
            raise InvalidParameterError(
                "jumps must be a list of [lag, height] pairs"
            ) from None
    return Kernel(family, **kwargs)


def from_config(path) -> Kernel:
    """Read a kernel from a TOML file; see the README for the schema."""
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidParameterError(f"bad kernel config {path}: {exc}") from None
    return from_mapping(data)


def to_mapping(kernel: Kernel) -> dict:
    """Plain-data form of the kernel, suitable for JSON manifests."""
    out: dict = {"family": kernel.family.value, "sigma2": kernel.sigma2}
    fam = kernel.family
    if fam is not Family.VARIOGRAM_LINEAR:
        out["r"] = kernel.r
    if fam in (Family.NUGGET_OU, Family.MULTI_JUMP_EXP, Family.POWER_EXP, Family.STEP):
        out["c"] = kernel.c
    if fam is Family.POWER_EXP:
        out["p"] = kernel.p
    if kernel.jumps:
        out["jumps"] = [list(pair) for pair in kernel.jumps]
    if fam in _VARIOGRAM_FAMILIES:
        out["tau2"] = kernel.tau2
    if kernel.cutoff is not None:
        out["cutoff"] = kernel.cutoff
    return out
