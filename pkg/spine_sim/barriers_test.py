"""
Tests for barrier events and the forward barrier tracker
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from core.errors import DomainError
from core.rng import split
from forward_sim.simulator import ForwardSimulator
from forward_sim.truncation import TruncationPolicy
from reproduction.brood_law import make_brood_law
from reproduction.dyadic_toy import make_dyadic_toy
from stable_walk.step_law import make_step_law
from .barriers import BarrierSpec, BarrierTracker, brother_term, event_AB
from .spine import SpineRealization

BROOD = make_brood_law(make_step_law(1.5, 1.0, 2.0))
TOY = make_dyadic_toy()


def test_spec_derived_quantities():
    spec = BarrierSpec(64, 0.0, alpha=1.5)
    assert spec.gamma == pytest.approx(1.0 / 3.75)
    assert spec.quarter == 24
    assert spec.k_max == 96
    assert spec.level == pytest.approx(math.log(64) / 1.5)
    assert spec.max_lambda == pytest.approx(math.log(64) / 3.0)
    assert spec.a(24) == 0.0 and spec.a(25) == spec.level
    assert spec.b(4, 90) == pytest.approx(4 ** (spec.gamma / 2))
    assert spec.b(80, 90) == pytest.approx(10 ** (spec.gamma / 2))


def test_invalid_spec():
    with pytest.raises(DomainError):
        BarrierSpec(0, 0.0)
    with pytest.raises(DomainError):
        BarrierSpec(8, -0.1)
    with pytest.raises(DomainError):
        BarrierSpec(8, 0.0, c_prime=0.0)


@given(st.integers(min_value=1, max_value=500), st.floats(min_value=1.05, max_value=1.95))
def test_index_ranges_floor(n, alpha):
    spec = BarrierSpec(n, 0.0, alpha=alpha)
    assert spec.quarter == math.floor(alpha * n / 4)
    assert spec.k_max == math.floor(alpha * n)
    assert spec.quarter <= spec.k_max


def test_spine_on_the_barrier_without_brothers():
    n = 16
    spec = BarrierSpec(n, 0.0)
    k_max = spec.k_max
    path = [0.0] + [spec.level] * k_max
    real = SpineRealization.from_path(path, [[] for _ in range(k_max)])
    for k in range(n + 1, k_max + 1):
        assert event_AB(real, spec, k) == (True, True)


def test_terminal_window_bounds_the_end():
    n = 16
    spec = BarrierSpec(n, 0.0, K=1.0)
    k = n + 1
    high = [0.0] + [spec.level + 2.0] * k
    real = SpineRealization.from_path(high, [[] for _ in range(k)])
    assert event_AB(real, spec, k) == (False, True)


def test_dip_below_barrier_breaks_a():
    n = 16
    spec = BarrierSpec(n, 0.0)
    k = n + 2
    path = [0.0] + [spec.level] * k
    path[spec.quarter + 1] = spec.level - 0.01
    real = SpineRealization.from_path(path, [[] for _ in range(k)])
    assert event_AB(real, spec, k)[0] is False


def test_k_out_of_range():
    spec = BarrierSpec(8, 0.0)
    real = SpineRealization.from_path([0.0] * 13, [[] for _ in range(12)])
    with pytest.raises(DomainError):
        event_AB(real, spec, 8)
    with pytest.raises(DomainError):
        event_AB(real, spec, spec.k_max + 1)
    short = SpineRealization.from_path([0.0] * 10, [[] for _ in range(9)])
    with pytest.raises(DomainError):
        event_AB(short, spec, 10)


@pytest.mark.parametrize("c_prime, expected", [(1.0, True), (0.5, False)])
def test_single_brother_at_the_barrier(c_prime, expected):
    spec = BarrierSpec(16, 0.0, c_prime=c_prime)
    k = 17
    path = [0.0] + [spec.level] * k
    brothers = [[0.0]] + [[] for _ in range(k - 1)]
    real = SpineRealization.from_path(path, brothers)
    assert event_AB(real, spec, k)[1] is expected


def test_brother_term():
    assert brother_term(np.array([0.0]), np.array([0.0]), 0.0)[0] == pytest.approx(1.0)
    assert brother_term(np.array([2.0]), np.array([math.log(3.0)]), 1.0)[0] == \
        pytest.approx(3.0 * 2.0 * math.exp(-1.0))
    assert brother_term(np.array([-1.0]), np.array([0.0]), 0.0)[0] == pytest.approx(math.e)


def _hits_by_enumeration(gens, spec, lambdas):
    """Evaluate every particle of generations n < k <= alpha n against event_AB"""
    hits = np.zeros(len(lambdas), dtype=bool)
    for k in range(spec.n + 1, min(spec.k_max, len(gens) - 1) + 1):
        for x in range(gens[k].groups):
            rows = [x]
            for g in range(k, 0, -1):
                rows.append(int(gens[g].parent_index[rows[-1]]))
            rows = rows[::-1]
            path = [float(gens[g].positions[rows[g]]) for g in range(k + 1)]
            brothers = []
            for g in range(1, k + 1):
                siblings = np.flatnonzero(gens[g].parent_index == rows[g - 1])
                brothers.append([float(gens[g].positions[s]) for s in siblings if s != rows[g]])
            real = SpineRealization.from_path(path, brothers)
            for j, lam in enumerate(lambdas):
                if all(event_AB(real, spec.with_lambda(lam), k)):
                    hits[j] = True
    return hits


def test_tracker_matches_path_by_path_enumeration():
    spec = BarrierSpec(4, 0.0, alpha=1.5, K=1.0, c_prime=1.0)
    lambdas = [0.0, 0.4]
    total = 0
    for seed in range(60):
        gens = []
        tracker = BarrierTracker(spec, lambdas)
        ForwardSimulator(TOY).run(split(seed, 0), spec.k_max, tracker, on_generation=gens.append)
        expected = _hits_by_enumeration(gens, spec, lambdas)
        assert tracker.hits.tolist() == expected.tolist()
        total += int(expected.sum())
    assert 0 < total < 120


def _forward_hits(spec, lambdas, seed):
    tracker = BarrierTracker(spec, lambdas)
    policy = TruncationPolicy(ceiling_scale=3.0, max_population=2000)
    ForwardSimulator(BROOD, policy).run(split(seed, 0), spec.k_max, tracker)
    return tracker.hits


def test_event_grows_with_k_and_c_prime():
    lambdas = [0.0, 0.5]
    for seed in range(10):
        tight = _forward_hits(BarrierSpec(8, 0.0, K=1.0, c_prime=1.0), lambdas, seed)
        wide_k = _forward_hits(BarrierSpec(8, 0.0, K=5.0, c_prime=1.0), lambdas, seed)
        wide_c = _forward_hits(BarrierSpec(8, 0.0, K=1.0, c_prime=10.0), lambdas, seed)
        assert np.all(tight <= wide_k)
        assert np.all(tight <= wide_c)


def test_tracker_rejects_negative_lambda():
    with pytest.raises(DomainError):
        BarrierTracker(BarrierSpec(8, 0.0), [-1.0])
