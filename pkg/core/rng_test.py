"""
Tests for deterministic random streams
"""

import numpy as np
import pytest

from .rng import CounterStream, ROOT_LABEL, split, to_unit_interval, within_group_index


def test_split_is_reproducible():
    a = split(7, 3).generator().random(5)
    b = split(7, 3).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, split(7, 4).generator().random(5))
    assert not np.array_equal(a, split(8, 3).generator().random(5))


def test_split_matches_the_documented_rule():
    expected = np.random.Generator(np.random.PCG64(np.random.SeedSequence(7, spawn_key=(3,))))
    assert np.array_equal(split(7, 3).generator().random(4), expected.random(4))


def test_seed_labels_and_attempts():
    stream = split(11, 2)
    assert stream.seed_label == "11:2"
    assert stream.attempt(0) is stream
    retry = stream.attempt(3)
    assert retry.seed_label == "11:2:3"
    assert retry.key != stream.key
    assert retry.key == stream.attempt(3).key


def test_negative_seeds_are_rejected():
    with pytest.raises(ValueError):
        split(-1, 0)


def test_counter_uniforms_depend_only_on_the_label():
    counter = split(5, 0).counter()
    labels = CounterStream.child_labels(np.array([ROOT_LABEL] * 3, dtype=np.uint64), np.arange(3))
    full = counter.uniforms(labels, 0)
    assert np.array_equal(counter.uniforms(labels[1:], 0), full[1:])
    assert not np.array_equal(counter.uniforms(labels, 1), full)
    assert ((full >= 0.0) & (full < 1.0)).all()


def test_unit_interval_extremes():
    u = to_unit_interval(np.array([0, np.iinfo(np.uint64).max], dtype=np.uint64))
    assert u[0] == 0.0
    assert u[1] < 1.0


def test_within_group_index():
    group, member = within_group_index(np.array([2, 0, 3]))
    assert group.tolist() == [0, 0, 2, 2, 2]
    assert member.tolist() == [0, 1, 0, 1, 2]
