"""
Estimator utilities shared by every simulation package

Pure functions only: interval estimates, log-log slope fits and the
comparison rules the verdicts use.
"""

import math
from typing import Iterable, NamedTuple, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from core.errors import DomainError, InsufficientDataError


class SlopeFit(NamedTuple):
    slope: float
    stderr: float
    intercept: float = 0.0


class MeanEstimate(NamedTuple):
    """Sample mean with a normal-approximation confidence interval"""
    mean: float
    stderr: float
    low: float
    high: float
    count: int


def z_value(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise DomainError("confidence must lie in (0,1)")
    return float(stats.norm.ppf(0.5 + confidence / 2.0))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval for a binomial proportion

    Args:
        successes: Number of successes, 0 <= successes <= trials
        trials: Number of trials, >= 1
        confidence: Two-sided confidence level

    Returns:
        (low, high)
    """
    if trials < 1 or successes < 0 or successes > trials:
        raise DomainError(f"invalid counts: successes={successes}, trials={trials}")
    z = z_value(confidence)
    p = successes / trials
    z2n = z * z / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def mean_interval(values: Union[Sequence[float], np.ndarray],
                  confidence: float = 0.95) -> MeanEstimate:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InsufficientDataError("no values to average")
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else float("inf")
    half = z_value(confidence) * stderr
    return MeanEstimate(mean, stderr, mean - half, mean + half, int(values.size))


def intervals_overlap(a: Tuple[float, float], b: Tuple[float, float]) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def fit_loglog_slope(points: Iterable[Tuple[float, float]]) -> SlopeFit:
    """
    Least-squares slope of log y against log x

    Raises:
        InsufficientDataError: fewer than 3 points
        DomainError: a nonpositive coordinate
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise InsufficientDataError("need at least 3 points for a slope fit")
    x, y = pts[:, 0], pts[:, 1]
    if (y <= 0).any():
        raise DomainError("ordinates must be positive for a log-log fit")
    if (x <= 0).any():
        raise DomainError("abscissae must be positive for a log-log fit")
    return fit_linear_slope(np.log(x), np.log(y))


def fit_linear_slope(x, y) -> SlopeFit:
    """Ordinary least squares of y on x"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise InsufficientDataError("need at least 3 points for a slope fit")
    if np.ptp(y) == 0.0:
        return SlopeFit(0.0, 0.0, float(y[0]))
    result = stats.linregress(x, y)
    return SlopeFit(float(result.slope), float(result.stderr), float(result.intercept))


def within(value: float, target: float, tolerance: float) -> bool:
    return abs(value - target) <= tolerance
