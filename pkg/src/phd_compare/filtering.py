"""Sequential Monte Carlo propagation of a particle intensity.

predict / update / resample are pure functions: each takes a ParticlePhd plus
an explicit RNG and returns a new ParticlePhd, so a tracker instance is just a
value threaded through filter_step and two trackers can run side by side
without coordination.

Weights keep expected-object-count semantics throughout. The corrector hands
every measurement a total posterior mass share of s / (clutter + s) where s is
the measurement's detection likelihood mass, so with no clutter each
measurement accounts for exactly one object whenever any particle explains it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phd import ParticlePhd
from .scenario import ObservationSet

__all__ = [
    "MotionModel",
    "SensorModel",
    "BirthModel",
    "FilterConfig",
    "FilterDiagnostics",
    "predict",
    "update",
    "resample",
    "effective_sample_size",
    "filter_step",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MotionModel:
    """Near-constant-velocity kinematics with additive Gaussian noise per step.

    velocity_drift is the filter's assumed deterministic velocity change per
    step (usually 0); survival_probability scales every weight each predict.
    """

    position_noise_std: float
    velocity_noise_std: float
    survival_probability: float
    velocity_drift: float = 0.0

    def __post_init__(self) -> None:
        if self.position_noise_std < 0.0 or self.velocity_noise_std < 0.0:
            raise ValueError("process noise standard deviations must be >= 0")
        if not 0.0 <= self.survival_probability <= 1.0:
            raise ValueError("survival_probability must lie in [0, 1]")
        if not math.isfinite(self.velocity_drift):
            raise ValueError("velocity_drift must be finite")


@dataclass(frozen=True)
class SensorModel:
    """Detection probability, Gaussian measurement noise, clutter intensity.

    clutter_intensity is the expected number of spurious measurements per unit
    of state-space volume; 0 means a clutter-free sensor.
    """

    detection_probability: float
    position_noise_std: float
    velocity_noise_std: float
    clutter_intensity: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.detection_probability <= 1.0:
            raise ValueError("detection_probability must lie in (0, 1]")
        if self.position_noise_std <= 0.0 or self.velocity_noise_std <= 0.0:
            raise ValueError("measurement noise standard deviations must be > 0")
        if self.clutter_intensity < 0.0:
            raise ValueError("clutter_intensity must be >= 0")


@dataclass(frozen=True)
class BirthModel:
    """Constant birth intensity, uniform over a position x velocity box."""

    mass_per_step: float
    position_range: tuple[float, float]
    velocity_range: tuple[float, float]
    particles_per_birth: int

    def __post_init__(self) -> None:
        if self.mass_per_step < 0.0:
            raise ValueError("mass_per_step must be >= 0")
        if not self.position_range[0] < self.position_range[1]:
            raise ValueError("position_range must be non-degenerate")
        if not self.velocity_range[0] < self.velocity_range[1]:
            raise ValueError("velocity_range must be non-degenerate")
        if self.particles_per_birth < 1:
            raise ValueError("particles_per_birth must be at least 1")


@dataclass(frozen=True)
class FilterConfig:
    particles_per_expected_target: int
    motion: MotionModel
    sensor: SensorModel
    birth: BirthModel
    rng_seed: int

    def __post_init__(self) -> None:
        if self.particles_per_expected_target < 50:
            raise ValueError("particle budget must be at least 50")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


@dataclass
class FilterDiagnostics:
    """Mutable counters for the rare degenerate paths."""

    zero_likelihood_observations: int = 0
    empty_resamples: int = 0


def predict(
    phd: ParticlePhd,
    motion: MotionModel,
    birth: BirthModel,
    dt: float,
    rng: np.random.Generator,
) -> ParticlePhd:
    """Move particles one step, scale weights by survival, append births.

    Birth particles carry a total weight of birth.mass_per_step, spread
    uniformly over the birth box; nothing is appended when that mass is 0.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    n = len(phd)
    if n:
        x = phd.positions + phd.velocities * dt + rng.normal(
            0.0, motion.position_noise_std, n
        )
        v = phd.velocities + motion.velocity_drift + rng.normal(
            0.0, motion.velocity_noise_std, n
        )
        w = phd.weights * motion.survival_probability
    else:
        x = np.empty(0)
        v = np.empty(0)
        w = np.empty(0)
    if birth.mass_per_step > 0.0:
        m = birth.particles_per_birth
        bx = rng.uniform(birth.position_range[0], birth.position_range[1], m)
        bv = rng.uniform(birth.velocity_range[0], birth.velocity_range[1], m)
        bw = np.full(m, birth.mass_per_step / m)
        x = np.concatenate([x, bx])
        v = np.concatenate([v, bv])
        w = np.concatenate([w, bw])
    return ParticlePhd(x, v, w)


def _measurement_likelihood(
    z: np.ndarray, phd: ParticlePhd, sensor: SensorModel
) -> np.ndarray:
    sx = sensor.position_noise_std
    sv = sensor.velocity_noise_std
    q = ((phd.positions - z[0]) / sx) ** 2 + ((phd.velocities - z[1]) / sv) ** 2
    return np.exp(-0.5 * q) / (_TWO_PI * sx * sv)


def update(
    phd: ParticlePhd,
    obs: ObservationSet,
    sensor: SensorModel,
    diagnostics: FilterDiagnostics | None = None,
) -> ParticlePhd:
    """Reweight particles against one scan; states are untouched.

    New weights are (1 - p_D) w_i plus, per measurement, that measurement's
    detection mass share. A measurement no particle can explain (zero
    likelihood everywhere and no clutter) contributes nothing and bumps the
    zero-likelihood diagnostic counter instead of dividing by zero.
    """
    p_d = sensor.detection_probability
    if len(obs) == 0:
        return ParticlePhd(phd.positions, phd.velocities, (1.0 - p_d) * phd.weights)
    detectable = p_d * phd.weights
    gained = np.zeros(len(phd))
    for z in obs.measurements:
        det = detectable * _measurement_likelihood(z, phd, sensor)
        denom = sensor.clutter_intensity + det.sum()
        if denom > 0.0:
            gained += det / denom
        elif diagnostics is not None:
            diagnostics.zero_likelihood_observations += 1
    return ParticlePhd(
        phd.positions, phd.velocities, (1.0 - p_d) * phd.weights + gained
    )


def resample(
    phd: ParticlePhd,
    target_count: int,
    rng: np.random.Generator,
    diagnostics: FilterDiagnostics | None = None,
) -> ParticlePhd:
    """Systematic resampling to target_count equally weighted particles.

    Every output weight is mass / target_count, so the total mass is carried
    over exactly. A massless input yields the empty PHD and is flagged.
    """
    if target_count < 1:
        raise ValueError("target_count must be at least 1")
    total = phd.mass()
    if total <= 0.0:
        if diagnostics is not None:
            diagnostics.empty_resamples += 1
        return ParticlePhd.empty()
    cdf = np.cumsum(phd.weights / total)
    cdf[-1] = 1.0
    u = (rng.random() + np.arange(target_count)) / target_count
    idx = np.searchsorted(cdf, u, side="right")
    return ParticlePhd(
        phd.positions[idx],
        phd.velocities[idx],
        np.full(target_count, total / target_count),
    )


def effective_sample_size(phd: ParticlePhd) -> float:
    """Kish effective sample size of the weight vector."""
    if len(phd) == 0:
        return 0.0
    total = phd.weights.sum()
    if total <= 0.0:
        return 0.0
    return float(total * total / np.sum(phd.weights**2))


def _particle_budget(config: FilterConfig, total_mass: float) -> int:
    return max(50, int(round(config.particles_per_expected_target * total_mass)))


def filter_step(
    phd: ParticlePhd,
    obs: ObservationSet,
    config: FilterConfig,
    dt: float,
    rng: np.random.Generator,
    diagnostics: FilterDiagnostics | None = None,
) -> ParticlePhd:
    """One predict to update to (conditional) resample cycle.

    Resampling only happens while mass is positive and the effective sample
    size has fallen below half the particle budget, where the budget scales
    the per-target particle count by the current expected target count.
    """
    predicted = predict(phd, config.motion, config.birth, dt, rng)
    updated = update(predicted, obs, config.sensor, diagnostics)
    total = updated.mass()
    if total > 0.0:
        budget = _particle_budget(config, total)
        if effective_sample_size(updated) < 0.5 * budget:
            return resample(updated, budget, rng, diagnostics)
    return updated
