"""Lp norms and distances between gridded intensities, plus discrepancy search.

Distances are Riemann sums over a shared grid: finite orders weight each bin
by dx, the max norm does not. The max norm takes |f| so that it satisfies the
norm axioms on signed difference functions as well.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .phd import GridPhd

__all__ = [
    "NORM_ORDERS",
    "DiscrepancyRegion",
    "lp_norm",
    "distance",
    "local_distance",
    "localize_failure",
]

NORM_ORDERS = (1.0, 2.0, math.inf)


def _validate_order(p) -> float:
    q = float(p)
    if q not in NORM_ORDERS:
        raise ValueError(f"norm order must be one of {NORM_ORDERS}, got {p!r}")
    return q


def _require_same_spec(f: GridPhd, g: GridPhd) -> None:
    if f.spec != g.spec:
        raise ConfigurationError(
            f"grid specs differ: {f.spec} vs {g.spec}; comparisons need a shared grid"
        )


@dataclass(frozen=True)
class DiscrepancyRegion:
    """A sub-interval whose local distance exceeds the search threshold."""

    a: float
    b: float
    local_distance: float
    depth: int

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError("region must have a < b")
        if self.local_distance < 0.0:
            raise ValueError("local_distance must be non-negative")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")

    @property
    def interval(self) -> tuple[float, float]:
        return (self.a, self.b)


def lp_norm(values, dx: float, p) -> float:
    """Lp norm of a (possibly signed) grid function with bin width dx."""
    q = _validate_order(p)
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    a = np.abs(v)
    if math.isinf(q):
        return float(a.max())
    return float(np.sum(a**q) * dx) ** (1.0 / q)


def distance(d_su: GridPhd, d_su_star: GridPhd, p) -> float:
    """Lp norm of the pointwise difference between two intensities."""
    _require_same_spec(d_su, d_su_star)
    return lp_norm(d_su.values - d_su_star.values, d_su.spec.dx, p)


def local_distance(d_su: GridPhd, d_su_star: GridPhd, p, interval) -> float:
    """distance() restricted to bins whose centers lie in [a, b]."""
    _require_same_spec(d_su, d_su_star)
    a, b = float(interval[0]), float(interval[1])
    spec = d_su.spec
    if a > b:
        raise ValueError("interval must satisfy a <= b")
    if a < spec.x_min or b > spec.x_max:
        raise ValueError(
            f"interval [{a}, {b}] outside grid domain [{spec.x_min}, {spec.x_max}]"
        )
    centers = spec.centers()
    mask = (centers >= a) & (centers <= b)
    if not mask.any():
        warnings.warn(
            f"interval [{a}, {b}] contains no bin centers; local distance is 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    diff = d_su.values[mask] - d_su_star.values[mask]
    return lp_norm(diff, spec.dx, p)


def localize_failure(
    d_su: GridPhd,
    d_su_star: GridPhd,
    p,
    threshold: float,
    min_width: float,
) -> list[DiscrepancyRegion]:
    """Recursively bisect the domain into the finest offending sub-intervals.

    Returns nothing when the global distance is within threshold. Otherwise
    each half whose local distance exceeds the threshold is bisected again,
    until halving would drop below min_width or the local distance falls to
    the threshold; the surviving leaves are returned in position order. A
    parent whose halves both pass is itself returned (the discrepancy is real
    but not attributable to one half).
    """
    _require_same_spec(d_su, d_su_star)
    q = _validate_order(p)
    spec = d_su.spec
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    if min_width < 2.0 * spec.dx:
        raise ValueError("min_width must be at least two bin widths")
    if distance(d_su, d_su_star, q) <= threshold:
        return []

    def search(a: float, b: float, depth: int) -> list[DiscrepancyRegion]:
        d = local_distance(d_su, d_su_star, q, (a, b))
        if d <= threshold:
            return []
        half = 0.5 * (b - a)
        if half < min_width:
            return [DiscrepancyRegion(a, b, d, depth)]
        mid = a + half
        children = search(a, mid, depth + 1) + search(mid, b, depth + 1)
        return children or [DiscrepancyRegion(a, b, d, depth)]

    return search(spec.x_min, spec.x_max, 0)
