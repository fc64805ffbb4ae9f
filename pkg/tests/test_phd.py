import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phd_compare.phd import (
    GridPhd,
    GridSpec,
    ParticlePhd,
    StateVector,
    discretize,
    mass,
    mass_in,
)

TEN_BINS = GridSpec(0.0, 10.0, 10)


def uniform_grid(value, spec=TEN_BINS):
    return GridPhd(spec, np.full(spec.n_bins, value))


class TestInvariants:
    def test_state_vector_rejects_non_finite(self):
        with pytest.raises(ValueError):
            StateVector(math.nan, 0.0)
        with pytest.raises(ValueError):
            StateVector(0.0, math.inf)

    def test_particle_weights_must_be_non_negative(self):
        with pytest.raises(ValueError):
            ParticlePhd([0.0], [0.0], [-1e-9])

    def test_particle_arrays_must_align(self):
        with pytest.raises(ValueError):
            ParticlePhd([0.0, 1.0], [0.0], [1.0, 1.0])

    def test_particle_states_must_be_finite(self):
        with pytest.raises(ValueError):
            ParticlePhd([math.nan], [0.0], [1.0])

    def test_grid_spec_validation(self):
        with pytest.raises(ValueError):
            GridSpec(1.0, 1.0, 10)
        with pytest.raises(ValueError):
            GridSpec(0.0, 1.0, 1)

    def test_grid_values_must_be_non_negative_finite(self):
        with pytest.raises(ValueError):
            GridPhd(TEN_BINS, np.full(10, -0.1))
        with pytest.raises(ValueError):
            GridPhd(TEN_BINS, np.full(10, math.inf))

    def test_grid_length_checked(self):
        with pytest.raises(ValueError):
            GridPhd(TEN_BINS, np.zeros(9))

    def test_values_are_frozen(self):
        g = uniform_grid(1.0)
        with pytest.raises(ValueError):
            g.values[0] = 2.0
        p = ParticlePhd([1.0], [0.0], [1.0])
        with pytest.raises(ValueError):
            p.weights[0] = 2.0


class TestMass:
    def test_empty_particle_set_has_zero_mass(self):
        assert mass(ParticlePhd.empty()) == 0.0

    def test_zero_grid_has_zero_mass(self):
        assert mass(GridPhd.zeros(TEN_BINS)) == 0.0

    def test_uniform_grid_mass(self):
        # 10 bins * 0.3 objects/m * 1 m
        assert mass(uniform_grid(0.3)) == pytest.approx(3.0, rel=1e-12)

    def test_particle_mass_is_weight_sum(self):
        p = ParticlePhd([1.0, 2.0], [0.0, 0.0], [0.4, 1.1])
        assert mass(p) == pytest.approx(1.5, rel=1e-12)


class TestMassIn:
    def test_zero_width_interval(self):
        assert mass_in(uniform_grid(0.7), (3.3, 3.3)) == 0.0

    def test_uniform_subinterval(self):
        assert mass_in(uniform_grid(0.5), (2.0, 6.0)) == pytest.approx(2.0, rel=1e-12)

    def test_full_domain_equals_mass_exactly(self):
        rng = np.random.default_rng(5)
        g = GridPhd(TEN_BINS, rng.uniform(0.0, 2.0, 10))
        assert mass_in(g, (0.0, 10.0)) == mass(g)

    def test_fractional_bin_overlap(self):
        g = uniform_grid(1.0)
        assert mass_in(g, (0.25, 0.75)) == pytest.approx(0.5, rel=1e-12)

    def test_outside_domain_rejected(self):
        g = uniform_grid(1.0)
        with pytest.raises(ValueError):
            mass_in(g, (-0.1, 5.0))
        with pytest.raises(ValueError):
            mass_in(g, (5.0, 10.1))
        with pytest.raises(ValueError):
            mass_in(g, (6.0, 5.0))

    @given(
        values=st.lists(st.floats(0.0, 10.0), min_size=10, max_size=10),
        cuts=st.tuples(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(0.0, 10.0)),
    )
    @settings(max_examples=200)
    def test_additivity_over_adjacent_intervals(self, values, cuts):
        a, b, c = sorted(cuts)
        g = GridPhd(TEN_BINS, np.array(values))
        left = mass_in(g, (a, b))
        right = mass_in(g, (b, c))
        both = mass_in(g, (a, c))
        assert left + right == pytest.approx(both, rel=1e-9, abs=1e-12)


class TestDiscretize:
    def test_single_particle_lands_in_its_bin(self):
        p = ParticlePhd([5.5], [0.0], [1.0])
        grid, dropped = discretize(p, TEN_BINS)
        assert dropped == 0.0
        expected = np.zeros(10)
        expected[5] = 1.0  # weight / dx with dx = 1
        np.testing.assert_allclose(grid.values, expected)
        assert mass(grid) == pytest.approx(1.0, rel=1e-12)

    def test_empty_particles_give_zero_grid(self):
        grid, dropped = discretize(ParticlePhd.empty(), TEN_BINS)
        assert dropped == 0.0
        assert not grid.values.any()

    def test_same_bin_weights_add(self):
        p = ParticlePhd([2.2, 2.3], [0.0, 0.0], [0.5, 0.5])
        grid, _ = discretize(p, TEN_BINS)
        assert grid.values[2] == pytest.approx(1.0, rel=1e-12)

    def test_out_of_domain_mass_reported(self):
        p = ParticlePhd([-1.0, 5.0, 11.0], [0.0] * 3, [0.25, 1.0, 0.5])
        grid, dropped = discretize(p, TEN_BINS)
        assert dropped == pytest.approx(0.75, rel=1e-12)
        assert mass(grid) == pytest.approx(1.0, rel=1e-12)

    def test_domain_edges(self):
        p = ParticlePhd([0.0, 10.0], [0.0, 0.0], [1.0, 1.0])
        grid, dropped = discretize(p, TEN_BINS)
        assert dropped == 0.0
        assert grid.values[0] == pytest.approx(1.0)
        assert grid.values[-1] == pytest.approx(1.0)

    @given(
        xs=st.lists(st.floats(0.0, 10.0), min_size=1, max_size=40),
        seed=st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=200)
    def test_mass_conservation_inside_domain(self, xs, seed):
        rng = np.random.default_rng(seed)
        w = rng.uniform(0.0, 3.0, len(xs))
        p = ParticlePhd(np.array(xs), np.zeros(len(xs)), w)
        grid, dropped = discretize(p, TEN_BINS)
        assert dropped == 0.0
        assert mass(grid) == pytest.approx(mass(p), rel=1e-9, abs=1e-12)
        assert (grid.values >= 0.0).all()
