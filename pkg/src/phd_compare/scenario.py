"""Seeded ground-truth simulator: one unit, three sub-units, two sensors.

The unit drifts along a 1D road with a fresh velocity draw each step; its
three sub-units sit one doctrine spacing apart, centered on the unit, each
jittered by the doctrine spread. Two sensors observe the scene independently:
one reports the unit, the other reports the sub-units, both with Bernoulli
missed detections and Gaussian position/velocity noise.

The master seed is split into three independent streams (truth, unit sensor,
sub-unit sensor) so the two observation sequences are statistically
independent given the truth, and perturbing one sensor's stream leaves the
other sensor's output bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ScenarioConfig",
    "GroundTruth",
    "ObservationSet",
    "subunit_positions",
    "simulate",
    "simulate_with_streams",
]

from .phd import StateVector


@dataclass(frozen=True)
class ScenarioConfig:
    unit_velocity_mean: float
    unit_velocity_std: float
    doctrine_spacing: float
    doctrine_sigma: float
    p_detect: float
    obs_noise_position: float
    obs_noise_velocity: float
    x_start: float
    dt: float
    n_steps: int
    seed: int

    def __post_init__(self) -> None:
        if not math.isfinite(self.unit_velocity_mean):
            raise ValueError("unit_velocity_mean must be finite")
        if self.unit_velocity_std < 0.0:
            raise ValueError("unit_velocity_std must be >= 0")
        if self.doctrine_spacing <= 0.0:
            raise ValueError("doctrine_spacing must be > 0")
        if self.doctrine_sigma < 0.0:
            raise ValueError("doctrine_sigma must be >= 0")
        if not 0.0 <= self.p_detect <= 1.0:
            raise ValueError("p_detect must lie in [0, 1]")
        if self.obs_noise_position <= 0.0 or self.obs_noise_velocity <= 0.0:
            raise ValueError("observation noise standard deviations must be > 0")
        if not math.isfinite(self.x_start):
            raise ValueError("x_start must be finite")
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Per-step unit state and the three sub-unit positions.

    Sub-units move with their unit, so their velocity is the unit velocity of
    the same step.
    """

    unit_positions: np.ndarray
    unit_velocities: np.ndarray
    subunit_positions: np.ndarray  # shape (n_steps, 3)

    def __post_init__(self) -> None:
        n = self.unit_positions.shape[0]
        if self.unit_velocities.shape != (n,) or self.subunit_positions.shape != (n, 3):
            raise ValueError("ground-truth arrays have inconsistent shapes")
        for arr in (self.unit_positions, self.unit_velocities, self.subunit_positions):
            if not np.isfinite(arr).all():
                raise ValueError("ground truth must be finite")
            arr.setflags(write=False)

    @property
    def n_steps(self) -> int:
        return int(self.unit_positions.shape[0])

    def unit_state(self, t: int) -> StateVector:
        return StateVector(
            float(self.unit_positions[t]), float(self.unit_velocities[t])
        )

    def subunit_states(self, t: int) -> list[StateVector]:
        v = float(self.unit_velocities[t])
        return [StateVector(float(x), v) for x in self.subunit_positions[t]]


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Measurements from one sensor at one time step; possibly empty."""

    t: int
    measurements: np.ndarray  # shape (k, 2): position, velocity

    def __post_init__(self) -> None:
        meas = np.asarray(self.measurements, dtype=float).reshape(-1, 2)
        if meas.size and not np.isfinite(meas).all():
            raise ValueError("measurements must be finite")
        meas.setflags(write=False)
        object.__setattr__(self, "measurements", meas)

    @classmethod
    def empty(cls, t: int) -> "ObservationSet":
        return cls(t, np.empty((0, 2)))

    def __len__(self) -> int:
        return int(self.measurements.shape[0])


def subunit_positions(
    x_t: float, config: ScenarioConfig, rng: np.random.Generator
) -> np.ndarray:
    """The three sub-unit positions for a unit at x_t (one doctrine draw).

    With zero doctrine spread the noise-free triple is exactly
    (x_t - spacing, x_t, x_t + spacing), whose center of gravity is x_t.
    """
    offsets = np.array([-config.doctrine_spacing, 0.0, config.doctrine_spacing])
    return x_t + offsets + rng.normal(0.0, config.doctrine_sigma, 3)


def _observe(
    truths: np.ndarray, p_detect: float, config: ScenarioConfig,
    rng: np.random.Generator, t: int,
) -> ObservationSet:
    # one detection coin per true object, then noise draws for detections only,
    # in object order (keeps the stream consumption deterministic)
    detected = rng.random(truths.shape[0]) < p_detect
    rows = []
    for x, v, hit in zip(truths[:, 0], truths[:, 1], detected):
        if hit:
            rows.append(
                (
                    x + rng.normal(0.0, config.obs_noise_position),
                    v + rng.normal(0.0, config.obs_noise_velocity),
                )
            )
    if not rows:
        return ObservationSet.empty(t)
    return ObservationSet(t, np.array(rows))


def simulate_with_streams(
    config: ScenarioConfig,
    truth_rng: np.random.Generator,
    unit_sensor_rng: np.random.Generator,
    subunit_sensor_rng: np.random.Generator,
) -> tuple[GroundTruth, list[ObservationSet], list[ObservationSet]]:
    """Simulate with caller-supplied RNG streams (the independence seam)."""
    n = config.n_steps
    unit_x = np.empty(n)
    unit_v = np.empty(n)
    sub_x = np.empty((n, 3))
    unit_obs: list[ObservationSet] = []
    subunit_obs: list[ObservationSet] = []
    x = config.x_start
    for t in range(n):
        v = truth_rng.normal(config.unit_velocity_mean, config.unit_velocity_std)
        subs = subunit_positions(x, config, truth_rng)
        unit_x[t] = x
        unit_v[t] = v
        sub_x[t] = subs
        unit_truth = np.array([[x, v]])
        sub_truth = np.column_stack([subs, np.full(3, v)])
        unit_obs.append(_observe(unit_truth, config.p_detect, config, unit_sensor_rng, t))
        subunit_obs.append(
            _observe(sub_truth, config.p_detect, config, subunit_sensor_rng, t)
        )
        x = x + v * config.dt
    truth = GroundTruth(unit_x, unit_v, sub_x)
    return truth, unit_obs, subunit_obs


def simulate(
    config: ScenarioConfig,
) -> tuple[GroundTruth, list[ObservationSet], list[ObservationSet]]:
    """Run the scenario from its seed; fully deterministic per config."""
    truth_ss, unit_ss, subunit_ss = np.random.SeedSequence(config.seed).spawn(3)
    return simulate_with_streams(
        config,
        np.random.default_rng(truth_ss),
        np.random.default_rng(unit_ss),
        np.random.default_rng(subunit_ss),
    )
