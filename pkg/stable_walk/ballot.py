"""
Ballot-type probabilities of the associated walk

Five fluctuation events are estimated by Monte Carlo, each with a Wilson
interval. With S the walk, m(i) = min_{j<=i} S_j and l = floor(lam * n):

- stay_above:           m(n) >= -a
- reflected_stay_above: max_{i<=n} S_i <= a
- end_below:            S_n <= b and m(n) >= -a
- window:               m(l) >= -a, min_{l<=i<=n} S_i >= b, S_n in [b+u, b+v]
- late_crossing:        m(n) >= -a, min_{l<=i<n} S_i > b, S_n <= b

Their probabilities decay like n^(-1/alpha), n^(-(1-1/alpha)) and
n^(-1-1/alpha) (last three) for fixed parameters.
"""

import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Sequence, Union

import numpy as np

from core.errors import ConfigError, DomainError
from harness.estimators import wilson_interval
from .step_law import StepLaw
from .walk_path import walk_blocks

logger = logging.getLogger(__name__)


class BallotKind(Enum):
    STAY_ABOVE = "stay_above"
    REFLECTED_STAY_ABOVE = "reflected_stay_above"
    END_BELOW = "end_below"
    WINDOW = "window"
    LATE_CROSSING = "late_crossing"

    @property
    def required_params(self) -> tuple:
        return _REQUIRED[self]

    @property
    def exponent(self):
        """n-decay exponent as a function of alpha"""
        if self is BallotKind.STAY_ABOVE:
            return lambda alpha: -1.0 / alpha
        if self is BallotKind.REFLECTED_STAY_ABOVE:
            return lambda alpha: -(1.0 - 1.0 / alpha)
        return lambda alpha: -1.0 - 1.0 / alpha


_REQUIRED = {
    BallotKind.STAY_ABOVE: ("a",),
    BallotKind.REFLECTED_STAY_ABOVE: ("a",),
    BallotKind.END_BELOW: ("a", "b"),
    BallotKind.WINDOW: ("a", "b", "u", "v", "lam"),
    BallotKind.LATE_CROSSING: ("a", "b", "lam"),
}


@dataclass(frozen=True)
class BallotEstimate:
    kind: str
    params: Dict[str, float]
    n: int
    reps: int
    successes: int
    estimate: float
    ci_low: float
    ci_high: float

    def to_row(self) -> Dict[str, Any]:
        row = asdict(self)
        row["params"] = ";".join(f"{k}={v:g}" for k, v in sorted(self.params.items()))
        return row


def parse_kind(kind: Union[str, BallotKind]) -> BallotKind:
    if isinstance(kind, BallotKind):
        return kind
    try:
        return BallotKind(kind)
    except ValueError:
        known = ", ".join(k.value for k in BallotKind)
        raise ConfigError(f"unknown ballot kind '{kind}' (known: {known})")


def validate_params(kind: BallotKind, params: Mapping[str, float]) -> Dict[str, float]:
    """Check that params match the kind and lie in their domain"""
    required = set(kind.required_params)
    given = set(params)
    if given != required:
        raise ConfigError(
            f"ballot kind '{kind.value}' takes parameters {sorted(required)}, got {sorted(given)}"
        )
    p = {k: float(v) for k, v in params.items()}
    if p["a"] < 0:
        raise DomainError("a must be >= 0")
    if "b" in p and p["b"] < -p["a"]:
        raise DomainError("b must be >= -a")
    if "u" in p and not 0.0 <= p["u"] <= p["v"]:
        raise DomainError("need 0 <= u <= v")
    if "lam" in p and not 0.0 < p["lam"] < 1.0:
        raise DomainError("lam must lie in (0,1)")
    return p


def split_index(lam: float, n: int) -> int:
    """floor(lam * n); non-integer index bounds round down"""
    return int(math.floor(lam * n))


def event_indicator(kind: BallotKind, positions: np.ndarray, n: int,
                    p: Mapping[str, float]) -> np.ndarray:
    """
    Evaluate the event on walks of length >= n

    Args:
        positions: Array (rows, >= n + 1) with column 0 equal to S_0 = 0
    """
    walks = positions[:, :n + 1]
    end = walks[:, n]
    if kind is BallotKind.REFLECTED_STAY_ABOVE:
        return walks.max(axis=1) <= p["a"]
    above = walks.min(axis=1) >= -p["a"]
    if kind is BallotKind.STAY_ABOVE:
        return above
    if kind is BallotKind.END_BELOW:
        return above & (end <= p["b"])
    split = split_index(p["lam"], n)
    if kind is BallotKind.WINDOW:
        early = walks[:, :split + 1].min(axis=1) >= -p["a"]
        late = walks[:, split:].min(axis=1) >= p["b"]
        return early & late & (end >= p["b"] + p["u"]) & (end <= p["b"] + p["v"])
    # late crossing
    if split < n:
        late = walks[:, split:n].min(axis=1) > p["b"]
    else:
        late = np.ones(walks.shape[0], dtype=bool)
    return above & late & (end <= p["b"])


def ballot_curve(law: StepLaw, kind: Union[str, BallotKind], params: Mapping[str, float],
                 ns: Sequence[int], reps: int, rng: np.random.Generator,
                 confidence: float = 0.95) -> List[BallotEstimate]:
    """
    Estimate one ballot event at several horizons on shared walks

    All horizons are evaluated on prefixes of the same reps walks of length
    max(ns), so the estimates are coupled.
    """
    kind = parse_kind(kind)
    p = validate_params(kind, params)
    ns = [int(n) for n in ns]
    if not ns or min(ns) < 1:
        raise DomainError("horizons must be >= 1")
    if reps < 1:
        raise DomainError("reps must be >= 1")

    counts = np.zeros(len(ns), dtype=np.int64)
    for block in walk_blocks(law, max(ns), reps, rng):
        for j, n in enumerate(ns):
            counts[j] += int(event_indicator(kind, block, n, p).sum())

    results = []
    for n, hits in zip(ns, counts):
        low, high = wilson_interval(int(hits), reps, confidence)
        results.append(BallotEstimate(kind.value, dict(p), n, reps, int(hits),
                                      hits / reps, low, high))
    logger.debug(f"{kind.value} {p}: " + ", ".join(f"n={r.n}:{r.estimate:.4g}" for r in results))
    return results


def ballot_probability(law: StepLaw, kind: Union[str, BallotKind], params: Mapping[str, float],
                       n: int, reps: int, rng: np.random.Generator,
                       confidence: float = 0.95) -> BallotEstimate:
    """Monte Carlo frequency of a ballot event at horizon n with a Wilson interval"""
    return ballot_curve(law, kind, params, [n], reps, rng, confidence)[0]
