"""Particle and grid forms of a target-intensity function over 1D position.

Both representations carry object-count semantics: integrating the intensity
over a region gives the expected number of objects inside that region, so the
total mass is a cardinality estimate, not a probability (it need not be 1).
Grid intensities are the common currency for comparing tracker outputs; the
particle form is what the filters propagate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Union

import numpy as np

__all__ = [
    "StateVector",
    "ParticlePhd",
    "GridSpec",
    "GridPhd",
    "DiscretizeResult",
    "mass",
    "mass_in",
    "discretize",
]


def _readonly_1d(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Single-object state: position in meters, velocity in meters/second."""

    position: float
    velocity: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.position) and math.isfinite(self.velocity)):
            raise ValueError("state components must be finite")


@dataclass(frozen=True, eq=False)
class ParticlePhd:
    """Weighted particle set whose weight sum is the expected object count.

    Weights are non-negative and unnormalized: total weight 2.7 means the set
    represents an estimated 2.7 objects. Arrays are copied on construction and
    frozen read-only, so instances can be shared freely.
    """

    positions: np.ndarray
    velocities: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        pos = _readonly_1d(self.positions)
        vel = _readonly_1d(self.velocities)
        w = _readonly_1d(self.weights)
        if not (pos.size == vel.size == w.size):
            raise ValueError("positions, velocities and weights must have equal length")
        if pos.size:
            if not (np.isfinite(pos).all() and np.isfinite(vel).all()):
                raise ValueError("particle states must be finite")
            if not np.isfinite(w).all() or (w < 0.0).any():
                raise ValueError("particle weights must be finite and non-negative")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)
        object.__setattr__(self, "weights", w)

    @classmethod
    def empty(cls) -> "ParticlePhd":
        z = np.empty(0)
        return cls(z, z, z)

    @classmethod
    def from_states(cls, states, weights) -> "ParticlePhd":
        """Build from an iterable of StateVector plus matching weights."""
        states = list(states)
        return cls(
            np.array([s.position for s in states]),
            np.array([s.velocity for s in states]),
            np.array(list(weights), dtype=float),
        )

    def __len__(self) -> int:
        return int(self.positions.size)

    def particles(self) -> Iterator[tuple[StateVector, float]]:
        for x, v, w in zip(self.positions, self.velocities, self.weights):
            yield StateVector(float(x), float(v)), float(w)

    def mass(self) -> float:
        """Total weight = expected object count."""
        return float(self.weights.sum()) if len(self) else 0.0


@dataclass(frozen=True)
class GridSpec:
    """Uniform 1D position grid over [x_min, x_max] with n_bins cells."""

    x_min: float
    x_max: float
    n_bins: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if not self.x_min < self.x_max:
            raise ValueError("x_min must be strictly below x_max")
        if self.n_bins < 2:
            raise ValueError("n_bins must be at least 2")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_bins

    def edges(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_bins + 1)

    def centers(self) -> np.ndarray:
        e = self.edges()
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True, eq=False)
class GridPhd:
    """Intensity sampled on a GridSpec, in objects per meter.

    Values are non-negative and finite; mass is sum(values) * dx.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = _readonly_1d(self.values)
        if vals.size != self.spec.n_bins:
            raise ValueError(
                f"expected {self.spec.n_bins} intensity values, got {vals.size}"
            )
        if not np.isfinite(vals).all() or (vals < 0.0).any():
            raise ValueError("grid intensities must be finite and non-negative")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, spec: GridSpec) -> "GridPhd":
        return cls(spec, np.zeros(spec.n_bins))

    def mass(self) -> float:
        return float(self.values.sum() * self.spec.dx)


def mass(phd: Union[ParticlePhd, GridPhd]) -> float:
    """Expected object count represented by either PHD form."""
    return phd.mass()


def mass_in(phd: GridPhd, interval) -> float:
    """Expected object count inside [a, b]; partial bins count fractionally.

    The interval must lie inside the grid domain. Bins fully covered by the
    interval contribute their entire mass, so mass_in over the full domain
    equals mass() exactly.
    """
    a, b = float(interval[0]), float(interval[1])
    spec = phd.spec
    if a > b:
        raise ValueError("interval must satisfy a <= b")
    if a < spec.x_min or b > spec.x_max:
        raise ValueError(
            f"interval [{a}, {b}] outside grid domain [{spec.x_min}, {spec.x_max}]"
        )
    edges = spec.edges()
    lo = np.maximum(edges[:-1], a)
    hi = np.minimum(edges[1:], b)
    frac = np.clip(hi - lo, 0.0, None) / spec.dx
    covered = (edges[:-1] >= a) & (edges[1:] <= b)
    weight = np.where(covered, 1.0, frac)
    return float(np.sum(phd.values * weight) * spec.dx)


class DiscretizeResult(NamedTuple):
    grid: GridPhd
    dropped_mass: float


def discretize(phd: ParticlePhd, spec: GridSpec) -> DiscretizeResult:
    """Histogram the particle weights onto the grid's position bins.

    Bin membership is half-open [edge_i, edge_i+1) with the last bin closed at
    x_max. Each deposited weight is divided by dx so the result is an
    intensity; total grid mass equals the deposited weight. Particles outside
    the domain are dropped and their summed weight reported alongside.
    """
    n = spec.n_bins
    if len(phd) == 0:
        return DiscretizeResult(GridPhd.zeros(spec), 0.0)
    x = phd.positions
    idx = np.floor((x - spec.x_min) / spec.dx).astype(np.int64)
    # a particle exactly on (or rounded to) the upper edge belongs to the last bin
    idx = np.where((idx == n) & (x <= spec.x_max), n - 1, idx)
    inside = (idx >= 0) & (idx < n)
    counts = np.bincount(idx[inside], weights=phd.weights[inside], minlength=n)
    dropped = float(phd.weights[~inside].sum())
    return DiscretizeResult(GridPhd(spec, counts / spec.dx), dropped)
