"""Doctrine masks and the convolution that synthesizes a sub-unit intensity.

A doctrine states where sub-units sit relative to their parent unit: a list of
position offsets, each blurred by a common Gaussian spread. Written as an
intensity over relative position it becomes a convolution mask; convolving the
unit intensity with it yields the sub-unit intensity the doctrine predicts,
with total mass scaled by the sub-unit count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError
from .metrics import distance
from .phd import GridPhd, GridSpec

__all__ = [
    "DoctrineSpec",
    "DoctrineMask",
    "ConvolutionResult",
    "doctrine_mask",
    "apply_doctrine",
    "superpose",
    "select_best_doctrine",
]

# Relative mask-mass error tolerated before the truncation radius is rejected.
_MASS_TOLERANCE = 1e-6


@dataclass(frozen=True)
class DoctrineSpec:
    """Sub-unit layout relative to the unit: offsets, spread, per-offset weights.

    The weight sum is the expected number of sub-units per unit; sigma is the
    standard deviation of the random deviation from the prescribed offsets.
    """

    offsets: tuple[float, ...]
    sigma: float
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        offsets = tuple(float(o) for o in self.offsets)
        weights = tuple(float(w) for w in self.weights)
        if len(offsets) < 1:
            raise ValueError("at least one offset is required")
        if len(offsets) != len(weights):
            raise ValueError("offsets and weights must have equal length")
        if not all(math.isfinite(o) for o in offsets):
            raise ValueError("offsets must be finite")
        if not all(math.isfinite(w) and w > 0.0 for w in weights):
            raise ValueError("weights must be finite and positive")
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError("sigma must be finite and non-negative")
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def evenly_spaced(cls, spacing: float, sigma: float, count: int = 3) -> "DoctrineSpec":
        """count sub-units a fixed distance apart, centered on the unit."""
        if count < 1:
            raise ValueError("count must be at least 1")
        if spacing <= 0.0:
            raise ValueError("spacing must be positive")
        mid = 0.5 * (count - 1)
        offsets = tuple((i - mid) * spacing for i in range(count))
        return cls(offsets, sigma, (1.0,) * count)

    @property
    def subunit_count(self) -> float:
        return float(sum(self.weights))


@dataclass(frozen=True, eq=False)
class DoctrineMask:
    """A doctrine discretized onto a symmetric grid centered on zero offset.

    dx is the authoritative bin width used at construction; downstream
    convolution requires it to match the comparison grid's bin width exactly.
    """

    grid: GridPhd
    dx: float

    def __post_init__(self) -> None:
        n = self.grid.spec.n_bins
        if n % 2 != 1:
            raise ValueError("mask grid must have an odd number of bins")
        if abs(self.grid.spec.x_min + self.grid.spec.x_max) > 1e-9 * self.dx:
            raise ValueError("mask grid must be symmetric about zero")

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    @property
    def center_index(self) -> int:
        return (self.grid.spec.n_bins - 1) // 2

    def mass(self) -> float:
        return self.grid.mass()


def _mask_geometry(half_width: float, dx: float) -> tuple[int, GridSpec]:
    half_bins = max(1, int(math.ceil(half_width / dx)))
    n = 2 * half_bins + 1
    lo = -(half_bins + 0.5) * dx
    hi = (half_bins + 0.5) * dx
    return half_bins, GridSpec(lo, hi, n)


def _check_mask_mass(mask: DoctrineMask, target: float) -> None:
    if abs(mask.mass() - target) > _MASS_TOLERANCE * target:
        raise ValueError(
            "mask mass deviates from the sub-unit count; "
            "increase truncation_radius_sigmas (>= 5 keeps the error below 1e-6)"
        )


def doctrine_mask(
    spec: DoctrineSpec, dx: float, truncation_radius_sigmas: float = 5.0
) -> DoctrineMask:
    """Discretize a doctrine into a convolution mask with bin width dx.

    Each offset contributes its weight as exact per-bin Gaussian mass (CDF
    differences), truncated at truncation_radius_sigmas standard deviations
    beyond the outermost offset. When sigma is below half a bin the component
    collapses to a point mass in the bin containing its offset, which keeps
    the sigma -> 0 limit well defined.
    """
    if dx <= 0.0:
        raise ValueError("dx must be positive")
    if truncation_radius_sigmas <= 0.0:
        raise ValueError("truncation_radius_sigmas must be positive")
    half_width = max(abs(o) for o in spec.offsets) + truncation_radius_sigmas * spec.sigma
    half_bins, grid_spec = _mask_geometry(half_width, dx)
    values = np.zeros(grid_spec.n_bins)
    if spec.sigma < 0.5 * dx:
        for offset, weight in zip(spec.offsets, spec.weights):
            k = half_bins + int(np.round(offset / dx))
            values[k] += weight / dx
    else:
        edges = (np.arange(grid_spec.n_bins + 1) - (half_bins + 0.5)) * dx
        for offset, weight in zip(spec.offsets, spec.weights):
            cdf = ndtr((edges - offset) / spec.sigma)
            values += weight * np.diff(cdf) / dx
    mask = DoctrineMask(GridPhd(grid_spec, values), float(dx))
    _check_mask_mass(mask, spec.subunit_count)
    return mask


class ConvolutionResult(NamedTuple):
    grid: GridPhd
    leaked_mass: float


def apply_doctrine(unit_phd: GridPhd, mask: DoctrineMask) -> ConvolutionResult:
    """Convolve a unit intensity with a doctrine mask (zero padded).

    The output lives on the unit grid; mass that the convolution pushes past
    the domain edges is reported as leaked_mass rather than wrapped or lost
    silently.
    """
    dx = unit_phd.spec.dx
    if mask.dx != dx:
        raise ConfigurationError(
            f"mask bin width {mask.dx} does not exactly match grid bin width {dx}"
        )
    k = mask.center_index
    full = np.convolve(unit_phd.values, mask.values)
    inside = full[k : k + unit_phd.spec.n_bins]
    leaked = float((full.sum() - inside.sum()) * dx * dx)
    out = GridPhd(unit_phd.spec, inside * dx)
    return ConvolutionResult(out, max(leaked, 0.0))


def superpose(
    specs: Sequence[tuple[DoctrineSpec, float]],
    dx: float,
    truncation_radius_sigmas: float = 5.0,
) -> DoctrineMask:
    """Prior-weighted superposition of several candidate doctrines.

    Priors must sum to 1; the resulting mask mass is the prior-weighted
    sub-unit count.
    """
    items = list(specs)
    if not items:
        raise ValueError("at least one doctrine is required")
    priors = [float(prior) for _, prior in items]
    if any(prior < 0.0 for prior in priors):
        raise ValueError("priors must be non-negative")
    if abs(sum(priors) - 1.0) > 1e-9:
        raise ValueError("priors must sum to 1")
    masks = [
        doctrine_mask(spec, dx, truncation_radius_sigmas) for spec, _ in items
    ]
    half_bins = max(m.center_index for m in masks)
    n = 2 * half_bins + 1
    values = np.zeros(n)
    for m, prior in zip(masks, priors):
        pad = half_bins - m.center_index
        values[pad : pad + m.grid.spec.n_bins] += prior * m.values
    lo = -(half_bins + 0.5) * dx
    hi = (half_bins + 0.5) * dx
    combined = DoctrineMask(GridPhd(GridSpec(lo, hi, n), values), float(dx))
    target = sum(p * s.subunit_count for (s, _), p in zip(items, priors))
    _check_mask_mass(combined, target)
    return combined


def select_best_doctrine(
    unit_phd: GridPhd,
    subunit_phd: GridPhd,
    candidates: Sequence[DoctrineSpec],
    p,
    truncation_radius_sigmas: float = 5.0,
) -> tuple[int, list[float]]:
    """Score each candidate doctrine against the tracked sub-unit intensity.

    Returns the argmin index (ties go to the lowest index) together with the
    full per-candidate distance list.
    """
    specs = list(candidates)
    if not specs:
        raise ValueError("at least one candidate doctrine is required")
    dx = unit_phd.spec.dx
    scores = []
    for spec in specs:
        mask = doctrine_mask(spec, dx, truncation_radius_sigmas)
        synthesized, _ = apply_doctrine(unit_phd, mask)
        scores.append(distance(subunit_phd, synthesized, p))
    return int(np.argmin(scores)), scores
