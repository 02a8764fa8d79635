"""
Tests for the single-location brood law
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from core.rng import generator
from stable_walk.step_law import make_step_law, sample_steps
from .brood_law import BroodLaw, make_brood_law

BASE = make_step_law(1.5, 1.0, 2.0)
LAW = make_brood_law(BASE)


def test_total_mass():
    assert LAW.Z == pytest.approx(0.574249, abs=5e-6)
    assert LAW.Z == pytest.approx(LAW.closed_form_Z, rel=1e-8)


@given(
    alpha=st.floats(min_value=1.05, max_value=1.95),
    x_m=st.floats(min_value=0.2, max_value=5.0),
    d=st.floats(min_value=0.2, max_value=8.0),
)
def test_mass_in_unit_interval(alpha, x_m, d):
    law = BroodLaw(make_step_law(alpha, x_m, d))
    assert 0.0 < law.Z <= 1.0
    assert law.Z == pytest.approx(law.closed_form_Z, rel=1e-8)


def test_location_density_below_step_density():
    y = np.linspace(-3.0, 40.0, 2000)
    assert np.all(LAW.location_density(y) <= BASE.pdf(y) + 1e-15)


def test_single_brood_is_colocated():
    rng = generator(1)
    for _ in range(50):
        brood = LAW.sample_brood(3.0, rng)
        assert brood.positions.size in (0, 1)
        if not brood.is_empty:
            assert brood.multiplicities[0] >= 1
            if brood.multiplicities[0] < 1000:
                assert np.all(brood.expand() == brood.positions[0])


def test_boundary_identities():
    batch = LAW.sample_broods(1_000_000, generator(2))
    per_brood = np.bincount(batch.parent_index, weights=batch.weights(), minlength=1_000_000)
    stderr = per_brood.std() / 1e3
    assert abs(per_brood.mean() - 1.0) <= 3 * stderr

    derivative = np.bincount(batch.parent_index, weights=batch.displacement * batch.weights(),
                             minlength=1_000_000)
    assert abs(derivative.mean()) <= 3 * derivative.std() / 1e3


def test_empty_fraction_matches_mass():
    batch = LAW.sample_broods(200_000, generator(3))
    alive = batch.parent_index.size / 200_000
    assert abs(alive - LAW.Z) < 4 * math.sqrt(LAW.Z * (1 - LAW.Z) / 200_000)


def test_randomized_rounding_is_unbiased_per_bin():
    batch = LAW.sample_broods(400_000, generator(4))
    y = batch.displacement
    ratio = batch.multiplicity / LAW.lambda_profile(y)
    for low, high in [(1.0, 1.5), (1.5, 2.5), (2.5, 4.0)]:
        sel = (y >= low) & (y < high)
        r = ratio[sel]
        assert abs(r.mean() - 1.0) <= 4 * r.std() / math.sqrt(r.size) + 1e-12


def test_mean_offspring_grows_with_cap():
    batch = LAW.sample_broods(200_000, generator(5))
    means = [np.minimum(batch.multiplicity, cap).sum() / 200_000 for cap in (10, 100, 1000, 10000)]
    assert all(b > a for a, b in zip(means, means[1:]))


def test_huge_broods_stay_finite():
    tail = 1000.0 ** -BASE.alpha
    u0 = LAW.left_mass + BASE.p_r * (1.0 - tail)
    batch = LAW.draw_broods(np.array([[u0, 0.5]]))
    assert batch.displacement[0] == pytest.approx(1000.0, rel=1e-6)
    assert np.isinf(batch.multiplicity[0])
    assert batch.log_multiplicity[0] == pytest.approx(batch.displacement[0])
    assert batch.weights()[0] == pytest.approx(1.0)


def test_tilted_spine_marginal_is_step_law():
    tilted = LAW.tilted_broods(generator(6).random((100_000, 3)))
    direct = sample_steps(BASE, 100_000, generator(7))
    assert stats.ks_2samp(tilted.spine_step, direct).pvalue > 0.01


def test_tilted_size_bias_at_fixed_location():
    y = math.log(5.5)
    u0 = float(BASE.cdf(np.array([y]))[0])
    rng = generator(8)
    uniforms = np.column_stack([np.full(50_000, u0), rng.random(50_000), rng.random(50_000)])
    tilted = LAW.tilted_broods(uniforms)
    assert np.allclose(tilted.spine_step, y, rtol=1e-9)
    assert set(np.unique(tilted.spine_group_size)) <= {5.0, 6.0}
    expected = (5 * 5 * 0.5 + 6 * 6 * 0.5) / 5.5
    sizes = tilted.spine_group_size
    assert abs(sizes.mean() - expected) < 4 * sizes.std() / math.sqrt(sizes.size)
    assert np.all(tilted.chosen_index < sizes)
    assert np.allclose(tilted.brother_multiplicity, sizes - 1)


def test_tilted_negative_location_has_no_brothers():
    tilted = LAW.tilted_broods(np.array([[0.1, 0.3, 0.7]]))
    assert tilted.spine_step[0] < 0
    assert tilted.spine_group_size[0] == 1.0
    assert tilted.brother_owner.size == 0
