"""
Tests for ballot-type estimates
"""

import numpy as np
import pytest

from core.errors import ConfigError, DomainError
from core.rng import generator
from harness.estimators import fit_loglog_slope
from .step_law import make_step_law
from .ballot import BallotKind, ballot_probability, ballot_curve, event_indicator

LAW = make_step_law(1.5, 1.0, 2.0)


def test_one_step_stay_above_is_p_r():
    est = ballot_probability(LAW, "stay_above", {"a": 0.0}, 1, 100_000, generator(1))
    assert est.ci_low <= LAW.p_r <= est.ci_high
    assert abs(est.estimate - LAW.p_r) < 0.01


def test_unreachable_barrier():
    n = 20
    est = ballot_probability(LAW, "stay_above", {"a": n * LAW.d}, n, 500, generator(2))
    assert est.estimate == 1.0
    assert est.ci_high == 1.0


def test_end_below_has_no_atom_at_zero():
    est = ballot_probability(LAW, "end_below", {"a": 0.0, "b": 0.0}, 1, 50_000, generator(3))
    assert est.successes == 0
    assert est.ci_low == 0.0


def test_params_must_match_kind():
    with pytest.raises(ConfigError):
        ballot_probability(LAW, "end_below", {"a": 1.0}, 4, 10, generator(0))
    with pytest.raises(ConfigError):
        ballot_probability(LAW, "stay_above", {"a": 1.0, "b": 0.0}, 4, 10, generator(0))
    with pytest.raises(ConfigError):
        ballot_probability(LAW, "sideways", {"a": 1.0}, 4, 10, generator(0))


@pytest.mark.parametrize("kind,params", [
    ("stay_above", {"a": -1.0}),
    ("end_below", {"a": 1.0, "b": -2.0}),
    ("window", {"a": 1.0, "b": 0.0, "u": 2.0, "v": 1.0, "lam": 0.5}),
    ("late_crossing", {"a": 1.0, "b": 0.0, "lam": 1.0}),
])
def test_params_out_of_domain(kind, params):
    with pytest.raises(DomainError):
        ballot_probability(LAW, kind, params, 4, 10, generator(0))


def test_window_and_late_crossing_on_forced_walk():
    positions = np.array([[0.0, 1.0, 0.5, 0.2, -0.5]])
    window = event_indicator(BallotKind.WINDOW, positions, 4,
                             {"a": 0.0, "b": -1.0, "u": 0.0, "v": 1.0, "lam": 0.5})
    late = event_indicator(BallotKind.LATE_CROSSING, positions, 4,
                           {"a": 1.0, "b": 0.0, "lam": 0.5})
    assert window.tolist() == [True]
    assert late.tolist() == [True]


def test_monotone_in_a_and_b_with_shared_walks():
    estimates = []
    for a, b in [(0.0, 0.0), (1.0, 0.0), (1.0, 2.0), (3.0, 2.0)]:
        est = ballot_probability(LAW, "end_below", {"a": a, "b": b}, 30, 4000, generator(12))
        estimates.append(est.successes)
    assert estimates == sorted(estimates)


def test_curve_is_deterministic():
    a = ballot_curve(LAW, "stay_above", {"a": 1.0}, [8, 16], 2000, generator(4))
    b = ballot_curve(LAW, "stay_above", {"a": 1.0}, [8, 16], 2000, generator(4))
    assert [e.successes for e in a] == [e.successes for e in b]


@pytest.mark.parametrize("kind,target", [
    ("stay_above", -1.0 / 1.5),
    ("reflected_stay_above", -(1.0 - 1.0 / 1.5)),
])
def test_scaling_exponents_small(kind, target):
    ns = [2 ** j for j in range(5, 11)]
    curve = ballot_curve(LAW, kind, {"a": 1.0}, ns, 20_000, generator(21))
    fit = fit_loglog_slope([(e.n, e.estimate) for e in curve])
    assert fit.slope == pytest.approx(target, abs=0.15)


@pytest.mark.slow
@pytest.mark.parametrize("kind,target", [
    ("stay_above", -1.0 / 1.5),
    ("reflected_stay_above", -(1.0 - 1.0 / 1.5)),
])
def test_scaling_exponents_desk_scale(kind, target):
    ns = [2 ** j for j in range(6, 15)]
    curve = ballot_curve(LAW, kind, {"a": 1.0}, ns, 100_000, generator(22))
    fit = fit_loglog_slope([(e.n, e.estimate) for e in curve])
    assert fit.slope == pytest.approx(target, abs=0.07)
