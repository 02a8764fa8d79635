"""
Tests for the condition checker
"""

import json

import numpy as np
import pytest

from core.errors import DomainError
from core.rng import generator
from stable_walk.step_law import make_step_law
from .brood_law import make_brood_law
from .dyadic_toy import make_dyadic_toy
from .conditions import check_conditions

Y_GRID = [2.0, 4.0, 8.0, 16.0, 32.0]


@pytest.fixture(scope="module")
def brood_report():
    law = make_brood_law(make_step_law(1.5, 1.0, 2.0))
    return check_conditions(law, 200_000, Y_GRID, generator(1), seed="1:0")


def test_boundary_rows_pass(brood_report):
    assert brood_report.row("boundary_mean_weight").passed
    assert brood_report.row("boundary_mean_derivative").passed


def test_tail_slope(brood_report):
    row = brood_report.row("tail_slope")
    assert row.estimate == pytest.approx(-1.5, abs=0.1)
    assert row.passed


def test_moment_rows_finite_and_stable(brood_report):
    for name in ("moment_x", "moment_x_tilde"):
        row = brood_report.row(name)
        assert np.isfinite(row.estimate)
    assert brood_report.row("moment_x").passed


def test_intensity_rows(brood_report):
    rows = [r for r in brood_report.rows if r.condition.startswith("intensity_")]
    assert len(rows) == 4
    assert all(r.passed for r in rows)


def test_capped_offspring_increases(brood_report):
    means = [brood_report.row(f"offspring_capped_{c}").estimate for c in ("10", "100", "1000", "10000")]
    assert means == sorted(means) and means[-1] > means[0]


def test_rows_carry_reps_and_seed(brood_report):
    assert all(r.reps == 200_000 and r.seed == "1:0" for r in brood_report.rows)
    decoded = json.loads(brood_report.to_json())
    assert len(decoded["rows"]) == len(brood_report.rows)


def test_toy_flags_tail_violation():
    report = check_conditions(make_dyadic_toy(), 20_000, Y_GRID, generator(2))
    row = report.row("tail_slope")
    assert "violates the stable tail condition by design" in row.note
    assert "exact zero" in row.note
    assert report.row("boundary_mean_weight").passed
    assert report.row("intensity_beyond_u").estimate == 0.0


def test_too_few_reps():
    with pytest.raises(DomainError):
        check_conditions(make_dyadic_toy(), 100, Y_GRID, generator(3))


def test_step_law_and_left_tail_rows(brood_report):
    ks = brood_report.row("step_law_ks")
    assert 0.0 <= ks.estimate < 0.01
    assert "p-value" in ks.note
    assert brood_report.row("left_tail_weight").passed
    assert brood_report.row("left_tail_weight").note == "level -4"
