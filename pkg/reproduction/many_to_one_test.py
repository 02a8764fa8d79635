"""
Tests for the many-to-one check
"""

import math

import pytest

from core.errors import ConfigError, DomainError
from core.rng import generator
from stable_walk.ballot import ballot_probability
from stable_walk.step_law import make_step_law
from .brood_law import make_brood_law
from .dyadic_toy import make_dyadic_toy
from .functionals import CATALOG
from .many_to_one import many_to_one_check

TOY = make_dyadic_toy()
BROOD = make_brood_law(make_step_law(1.5, 1.0, 2.0))


def _agree(result, z=4.0):
    spread = z * math.hypot(result.lhs.stderr, result.rhs.stderr)
    return abs(result.lhs.mean - result.rhs.mean) <= spread + 1e-12


def test_unit_weight_on_toy():
    result = many_to_one_check(TOY, "unit_weight", 3, 20_000, generator(1))
    assert result.rhs.mean == 1.0
    assert abs(result.lhs.mean - 1.0) <= 4 * result.lhs.stderr
    assert result.exact == pytest.approx(1.0, abs=1e-12)


def test_toy_exact_oracle():
    result = many_to_one_check(TOY, "leaf_nonpositive", 2, 20_000, generator(2))
    assert result.exact == pytest.approx((9 - 4 * math.sqrt(3)) / 4, abs=1e-12)
    assert abs(result.lhs.mean - result.exact) <= 4 * result.lhs.stderr
    assert abs(result.rhs.mean - result.exact) <= 4 * result.rhs.stderr


@pytest.mark.parametrize("functional", sorted(CATALOG))
def test_brood_law_sides_agree(functional):
    result = many_to_one_check(BROOD, functional, 4, 20_000, generator(3), walk_reps=50_000)
    assert _agree(result), result.to_row()


def test_stay_above_matches_ballot_probability():
    result = many_to_one_check(BROOD, "stay_above_weight", 4, 20_000, generator(4),
                               a=1.0, walk_reps=50_000)
    ballot = ballot_probability(BROOD.base, "stay_above", {"a": 1.0}, 4, 50_000, generator(5))
    assert result.rhs.low <= ballot.ci_high and ballot.ci_low <= result.rhs.high


def test_unknown_functional():
    with pytest.raises(ConfigError):
        many_to_one_check(TOY, "square_of_sum", 2, 100, generator(0))


def test_tree_side_depth_limit():
    with pytest.raises(DomainError):
        many_to_one_check(TOY, "unit_weight", 11, 100, generator(0))


@pytest.mark.slow
@pytest.mark.parametrize("functional", sorted(CATALOG))
def test_brood_law_sides_agree_n8(functional):
    result = many_to_one_check(BROOD, functional, 8, 100_000, generator(6), walk_reps=100_000)
    assert result.consistent or _agree(result), result.to_row()
