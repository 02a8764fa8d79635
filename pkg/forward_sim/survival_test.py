"""
Tests for survival conditioning
"""

import math

import pytest

from core.errors import ConfigError, SurvivalError
from core.rng import split
from reproduction.brood_law import make_brood_law
from reproduction.dyadic_toy import make_dyadic_toy
from stable_walk.step_law import make_step_law
from .simulator import ForwardSimulator
from .survival import first_surviving, survival_runs
from .truncation import TruncationPolicy

BROOD = make_brood_law(make_step_law(1.5, 1.0, 2.0))
SMALL = TruncationPolicy(ceiling_scale=3.0, max_population=2000)


def test_toy_always_survives():
    result = survival_runs(make_dyadic_toy(), 4, master_seed=1, want=5)
    assert result.attempts == 5
    assert result.survival_rate == 1.0
    assert all(run.stats[-1].n == 4 for run in result.runs)


def test_brood_law_rate_between_zero_and_root_survival():
    a = survival_runs(BROOD, 3, SMALL, master_seed=10, want=60)
    b = survival_runs(BROOD, 3, SMALL, master_seed=11, want=60)
    for result in (a, b):
        assert 0.0 < result.survival_rate < 1.0
        assert result.survival_rate <= BROOD.Z + 3 * result.stderr
        assert all(run.survived for run in result.runs)
    assert abs(a.survival_rate - b.survival_rate) <= 3 * math.hypot(a.stderr, b.stderr)


def test_want_zero_is_a_config_error():
    with pytest.raises(ConfigError):
        survival_runs(BROOD, 3, SMALL, want=0)


def test_gives_up_with_diagnostic():
    with pytest.raises(SurvivalError) as info:
        survival_runs(BROOD, 3, SMALL, master_seed=3, want=10, max_attempts=3)
    assert info.value.attempts == 3
    assert info.value.survivors < 10


def test_first_surviving_is_deterministic():
    sim = ForwardSimulator(BROOD, SMALL)
    a = first_surviving(sim, split(4, 2), 3)
    b = first_surviving(sim, split(4, 2), 3)
    assert a.survived
    assert a.stats == b.stats
    assert a.seed.startswith("4:2")
