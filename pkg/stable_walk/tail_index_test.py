"""
Tests for the Hill estimator
"""

import numpy as np
import pytest

from core.errors import DomainError, InsufficientDataError
from core.rng import generator
from .step_law import make_step_law, sample_steps
from .tail_index import fit_tail_index


def test_exact_pareto():
    rng = generator(31)
    samples = rng.pareto(1.5, 1_000_000) + 1.0
    fit = fit_tail_index(samples, 10_000)
    assert 1.45 <= fit.alpha_hat <= 1.55
    assert fit.stderr == pytest.approx(fit.alpha_hat / 100.0)


def test_step_law_positive_part():
    law = make_step_law(1.5, 1.0, 2.0)
    s = sample_steps(law, 1_000_000, generator(32))
    fit = fit_tail_index(s[s > 0], 5_000)
    assert 1.4 <= fit.alpha_hat <= 1.6
    assert fit.threshold >= law.x_m


def test_all_equal_samples_rejected():
    with pytest.raises(DomainError):
        fit_tail_index(np.full(100, 3.0), 10)


def test_too_few_positive_samples():
    with pytest.raises(InsufficientDataError):
        fit_tail_index(np.array([-1.0, 2.0, 3.0, 4.0]), 3)
