import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phd_compare.filtering import (
    BirthModel,
    FilterConfig,
    FilterDiagnostics,
    MotionModel,
    SensorModel,
    effective_sample_size,
    filter_step,
    predict,
    resample,
    update,
)
from phd_compare.phd import ParticlePhd
from phd_compare.scenario import ObservationSet

MOTION = MotionModel(
    position_noise_std=0.5, velocity_noise_std=0.2, survival_probability=0.99
)
SENSOR = SensorModel(
    detection_probability=0.9, position_noise_std=0.5, velocity_noise_std=0.1
)
BIRTH = BirthModel(
    mass_per_step=0.02,
    position_range=(0.0, 100.0),
    velocity_range=(-2.0, 4.0),
    particles_per_birth=50,
)
NO_BIRTH = BirthModel(
    mass_per_step=0.0,
    position_range=(0.0, 100.0),
    velocity_range=(-2.0, 4.0),
    particles_per_birth=50,
)


def cloud(n=200, mass=1.0, x0=50.0, seed=0):
    rng = np.random.default_rng(seed)
    return ParticlePhd(
        rng.normal(x0, 1.0, n), rng.normal(1.0, 0.3, n), np.full(n, mass / n)
    )


def obs(*measurements, t=0):
    if not measurements:
        return ObservationSet.empty(t)
    return ObservationSet(t, np.array(measurements))


class TestPredict:
    def test_mass_preserved_with_full_survival_and_no_birth(self):
        p = cloud()
        motion = MotionModel(0.5, 0.2, survival_probability=1.0)
        out = predict(p, motion, NO_BIRTH, 1.0, np.random.default_rng(1))
        assert out.mass() == p.mass()

    def test_survival_scales_mass(self):
        p = cloud(mass=1.0)
        motion = MotionModel(0.5, 0.2, survival_probability=0.9)
        out = predict(p, motion, NO_BIRTH, 1.0, np.random.default_rng(1))
        assert out.mass() == pytest.approx(0.9, rel=1e-12)

    def test_deterministic_kinematics_without_noise(self):
        p = ParticlePhd([0.0], [2.0], [1.0])
        motion = MotionModel(0.0, 0.0, survival_probability=1.0)
        out = predict(p, motion, NO_BIRTH, 1.0, np.random.default_rng(1))
        assert out.positions[0] == 2.0
        assert out.velocities[0] == 2.0

    def test_birth_adds_mass_and_particles(self):
        out = predict(ParticlePhd.empty(), MOTION, BIRTH, 1.0, np.random.default_rng(2))
        assert len(out) == BIRTH.particles_per_birth
        assert out.mass() == pytest.approx(0.02, rel=1e-12)
        assert (out.positions >= 0.0).all() and (out.positions <= 100.0).all()

    def test_dt_must_be_positive(self):
        with pytest.raises(ValueError):
            predict(cloud(), MOTION, NO_BIRTH, 0.0, np.random.default_rng(0))


class TestUpdate:
    def test_empty_scan_scales_mass_exactly(self):
        p = cloud(mass=2.0)
        out = update(p, obs(), SENSOR)
        assert out.mass() == pytest.approx((1.0 - 0.9) * 2.0, rel=1e-12)
        np.testing.assert_array_equal(out.positions, p.positions)

    def test_detection_term_cancellation_on_point_mass(self):
        # one particle, one measurement exactly on it, no clutter: the ratio
        # inside the corrector is exactly 1 whatever the likelihood peak is
        w = 1.0
        p = ParticlePhd([10.0], [1.0], [w])
        out = update(p, obs((10.0, 1.0)), SENSOR)
        assert out.mass() == pytest.approx((1.0 - 0.9) * w + w, rel=1e-12)

    def test_clutter_dominated_limit(self):
        heavy_clutter = SensorModel(0.9, 0.5, 0.1, clutter_intensity=1e12)
        p = cloud(mass=1.0)
        out = update(p, obs((50.0, 1.0)), heavy_clutter)
        floor = (1.0 - 0.9) * 1.0
        assert floor <= out.mass() <= floor + 1e-6

    def test_unexplainable_measurement_is_counted_not_crashed(self):
        p = ParticlePhd([0.0], [0.0], [1.0])
        diag = FilterDiagnostics()
        out = update(p, obs((5000.0, 0.0)), SENSOR, diag)  # likelihood underflows
        assert diag.zero_likelihood_observations == 1
        assert out.mass() == pytest.approx(0.1, rel=1e-12)

    @given(
        prior_mass=st.floats(1.0, 3.0),
        n=st.integers(1, 100),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=150)
    def test_corrector_mass_bounds_single_observation(self, prior_mass, n, seed):
        # single target, one scan, no clutter: the detection term adds at most
        # one object, so with prior mass >= 1 the posterior stays within
        # [(1-pD) m, (1-pD) m + m]
        rng = np.random.default_rng(seed)
        p = ParticlePhd(
            rng.normal(50.0, 2.0, n),
            rng.normal(1.0, 0.5, n),
            rng.uniform(0.1, 1.0, n) * (prior_mass / n),
        )
        p = ParticlePhd(p.positions, p.velocities, p.weights * (prior_mass / p.mass()))
        out = update(p, obs((50.0, 1.0)), SENSOR)
        lo = (1.0 - SENSOR.detection_probability) * p.mass()
        hi = lo + p.mass()
        assert lo - 1e-12 <= out.mass() <= hi + 1e-9


class TestResample:
    def test_uniform_weights_pass_through(self):
        p = cloud(n=100, mass=2.0)
        out = resample(p, 100, np.random.default_rng(0))
        assert len(out) == 100
        assert out.mass() == pytest.approx(2.0, rel=1e-12)
        assert set(out.positions) <= set(p.positions)

    def test_weight_arithmetic(self):
        p = cloud(n=300, mass=2.7)
        out = resample(p, 1000, np.random.default_rng(1))
        assert len(out) == 1000
        np.testing.assert_allclose(out.weights, 2.7 / 1000)

    def test_degenerate_single_particle(self):
        p = ParticlePhd([4.0], [1.0], [3.0])
        out = resample(p, 6, np.random.default_rng(2))
        assert len(out) == 6
        np.testing.assert_allclose(out.positions, 4.0)
        np.testing.assert_allclose(out.weights, 0.5)

    def test_zero_mass_flagged(self):
        diag = FilterDiagnostics()
        p = ParticlePhd([1.0], [0.0], [0.0])
        out = resample(p, 10, np.random.default_rng(3), diag)
        assert len(out) == 0
        assert diag.empty_resamples == 1

    def test_zero_weight_particles_never_selected(self):
        p = ParticlePhd([1.0, 2.0], [0.0, 0.0], [1.0, 0.0])
        out = resample(p, 50, np.random.default_rng(4))
        assert (out.positions == 1.0).all()


class TestEffectiveSampleSize:
    def test_uniform_weights(self):
        assert effective_sample_size(cloud(n=128)) == pytest.approx(128.0)

    def test_degenerate_weights(self):
        p = ParticlePhd([0.0, 1.0], [0.0, 0.0], [1.0, 0.0])
        assert effective_sample_size(p) == pytest.approx(1.0)

    def test_empty(self):
        assert effective_sample_size(ParticlePhd.empty()) == 0.0


def _config(seed=7, p_detect=0.95, birth=BIRTH):
    return FilterConfig(
        particles_per_expected_target=500,
        motion=MotionModel(0.5, 0.3, survival_probability=0.99),
        sensor=SensorModel(p_detect, 0.5, 0.1),
        birth=birth,
        rng_seed=seed,
    )


class TestFilterStep:
    def test_deterministic_given_seed(self):
        config = _config()
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(42)
            phd = ParticlePhd.empty()
            for t in range(10):
                phd = filter_step(phd, obs((50.0 + t, 1.0), t=t), config, 1.0, rng)
            runs.append(phd)
        a, b = runs
        np.testing.assert_array_equal(a.positions, b.positions)
        np.testing.assert_array_equal(a.velocities, b.velocities)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_mass_decays_geometrically_without_observations(self):
        config = _config(birth=NO_BIRTH)
        rng = np.random.default_rng(5)
        phd = cloud(n=100, mass=1.0, seed=6)
        steps = 25
        for t in range(steps):
            phd = filter_step(phd, obs(t=t), config, 1.0, rng)
        rate = config.motion.survival_probability * (
            1.0 - config.sensor.detection_probability
        )
        assert phd.mass() == pytest.approx(rate**steps, rel=1e-9)

    def test_long_run_tracks_single_target_cardinality(self):
        # well-observed single target: time-averaged mass near one object
        config = _config(seed=11)
        rng = np.random.default_rng(11)
        truth_rng = np.random.default_rng(99)
        phd = ParticlePhd.empty()
        masses = []
        x = 10.0
        for t in range(200):
            v = truth_rng.normal(1.0, 0.2)
            measurements = []
            if truth_rng.random() < 0.95:
                measurements.append(
                    (
                        x + truth_rng.normal(0.0, 0.5),
                        v + truth_rng.normal(0.0, 0.1),
                    )
                )
            phd = filter_step(phd, obs(*measurements, t=t), config, 1.0, rng)
            masses.append(phd.mass())
            x += v * 1.0
        avg = float(np.mean(masses[20:]))
        assert 0.8 <= avg <= 1.2

    def test_resample_triggered_by_low_ess(self):
        # a spike of weight on one particle forces an immediate resample
        config = _config(birth=NO_BIRTH)
        w = np.full(200, 1e-6)
        w[0] = 1.0
        phd = ParticlePhd(np.linspace(0, 100, 200), np.ones(200), w)
        out = filter_step(phd, obs(t=0), config, 1.0, np.random.default_rng(0))
        # post-update mass ~ 0.05; budget floors at 50 equal-weight particles
        assert len(out) == 50
        assert np.unique(out.weights).size == 1


class TestConfigValidation:
    def test_budget_floor(self):
        with pytest.raises(ValueError):
            FilterConfig(49, MOTION, SENSOR, BIRTH, rng_seed=0)

    def test_sensor_bounds(self):
        with pytest.raises(ValueError):
            SensorModel(0.0, 0.5, 0.1)
        with pytest.raises(ValueError):
            SensorModel(0.5, 0.0, 0.1)
        with pytest.raises(ValueError):
            SensorModel(0.5, 0.5, 0.1, clutter_intensity=-1.0)

    def test_motion_bounds(self):
        with pytest.raises(ValueError):
            MotionModel(-0.1, 0.2, 0.9)
        with pytest.raises(ValueError):
            MotionModel(0.1, 0.2, 1.5)

    def test_birth_bounds(self):
        with pytest.raises(ValueError):
            BirthModel(-0.1, (0.0, 1.0), (0.0, 1.0), 10)
        with pytest.raises(ValueError):
            BirthModel(0.1, (1.0, 1.0), (0.0, 1.0), 10)
        with pytest.raises(ValueError):
            BirthModel(0.1, (0.0, 1.0), (0.0, 1.0), 0)
