"""
Hill estimator for power-law tail indices
"""

import math
from dataclasses import dataclass

import numpy as np

from core.errors import DomainError, InsufficientDataError


@dataclass(frozen=True)
class TailIndexFit:
    alpha_hat: float
    stderr: float
    k_order: int
    threshold: float  # the (k+1)-th largest sample


def fit_tail_index(samples, k_order: int) -> TailIndexFit:
    """
    Hill estimate over the k_order largest order statistics

        H = 1/k * sum_{i<=k} log(x_(i) / x_(k+1)),  alpha_hat = 1 / H

    Nonpositive samples are discarded first.

    Raises:
        InsufficientDataError: fewer than k_order + 1 positive samples
        DomainError: zero log-spacings (e.g. all samples equal)
    """
    if k_order < 1:
        raise DomainError("k_order must be >= 1")
    x = np.asarray(samples, dtype=float)
    x = x[x > 0]
    if x.size <= k_order:
        raise InsufficientDataError(
            f"Hill estimator needs more than {k_order} positive samples, got {x.size}"
        )
    top = np.partition(x, x.size - k_order - 1)[x.size - k_order - 1:]
    threshold = float(np.min(top))
    largest = np.sort(top)[1:]
    h = float(np.mean(np.log(largest / threshold)))
    if h <= 0.0:
        raise DomainError("zero log-spacings in the upper order statistics")
    alpha_hat = 1.0 / h
    return TailIndexFit(alpha_hat, alpha_hat / math.sqrt(k_order), int(k_order), threshold)
