"""
Tests for generation records and statistics
"""

import math

import numpy as np
import pytest

from .generation import GenStats, Generation, compute_stats, scaled_beta_max


def _generation():
    return Generation(
        positions=np.array([0.0, 1.0]),
        multiplicity=np.array([2, 1], dtype=np.int64),
        parent_index=np.array([0, 0]),
        path_min=np.array([0.0, -2.0]),
        labels=np.array([1, 2], dtype=np.uint64),
        gen_index=3,
    )


def test_root():
    root = Generation.root()
    assert root.population == 1
    assert root.positions.tolist() == [0.0]
    assert root.parent_index.tolist() == [-1]


def test_compute_stats_by_hand():
    stats = compute_stats(_generation(), beta=1.0)
    assert stats.n == 3
    assert stats.M_n == 0.0
    assert stats.population == 3
    assert stats.W_n == pytest.approx(2.0 + math.exp(-1.0))
    assert stats.W_n_beta == pytest.approx(2.0)
    assert stats.D_n == pytest.approx(math.exp(-1.0))
    assert stats.W_n >= math.exp(-stats.M_n)


def test_beta_large_enough_keeps_everything():
    stats = compute_stats(_generation(), beta=2.0)
    assert stats.W_n_beta == stats.W_n


def test_extinct_generation():
    empty = _generation().select(np.array([], dtype=np.int64))
    stats = compute_stats(empty, beta=1.0)
    assert stats.population == 0
    assert stats.M_n == math.inf
    assert stats.W_n == 0.0 and stats.W_n_beta == 0.0 and stats.D_n == 0.0


def test_select_carries_marks():
    gen = _generation()
    gen.marks = {"flag": np.array([True, False])}
    sub = gen.select(np.array([1]))
    assert sub.positions.tolist() == [1.0]
    assert sub.marks["flag"].tolist() == [False]


def test_scaled_beta_max():
    stats = [GenStats(k, 0.0, 1.0, w, 0.0, 1, 0) for k, w in [(1, 0.5), (4, 0.4), (9, 0.1)]]
    assert scaled_beta_max(stats, 2.0, 1, 9) == pytest.approx(0.8)
    assert scaled_beta_max(stats, 2.0, 5, 9) == pytest.approx(0.3)
    assert scaled_beta_max(stats, 2.0, 10, 20) == 0.0
