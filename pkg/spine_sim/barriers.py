"""
Barrier events along a line of descent

For a particle x at generation k with ancestors x_0, ..., x_k:

    A_k: V(x_i) >= a_i for 0 <= i <= k and V(x_k) <= (1/alpha) log n - lambda + K
    B_k: for 0 <= i < k, sum over the brothers u of x_{i+1} of
         (1 + (V(u) - a_i)_+) e^{-(V(u) - a_i)} <= c' e^{-b_i}

with a_i = (1/alpha) log n - lambda on floor(alpha n / 4) < i <= k and 0
before, b_i = i^{gamma/2} up to floor(alpha n / 4) and (k - i)^{gamma/2}
after, gamma = 1 / (alpha (alpha + 1)). E(n, lambda) is the union of
A_k and B_k over n < k <= floor(alpha n) and all particles of generation k.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from core.errors import DomainError
from forward_sim.generation import Generation
from reproduction.interfaces import BroodBatch
from .spine import SpineRealization

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BarrierSpec:
    """
    Barrier parameters for E(n, lambda)

    Attributes:
        n: Time scale
        lam: lambda >= 0
        alpha: Tail index of the associated walk
        K: Terminal window width
        c_prime: Brother bound constant
    """
    n: int
    lam: float
    alpha: float = 1.5
    K: float = 5.0
    c_prime: float = 10.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("barrier time scale n must be >= 1")
        if not 1.0 < self.alpha <= 2.0:
            raise DomainError("alpha must lie in (1,2]")
        if not self.lam >= 0.0:
            raise DomainError("lambda must be >= 0")
        if not self.c_prime > 0.0:
            raise DomainError("c_prime must be > 0")

    @property
    def gamma(self) -> float:
        return 1.0 / (self.alpha * (self.alpha + 1.0))

    @property
    def quarter(self) -> int:
        """floor(alpha n / 4)"""
        return int(math.floor(self.alpha * self.n / 4.0))

    @property
    def k_max(self) -> int:
        """floor(alpha n)"""
        return int(math.floor(self.alpha * self.n))

    @property
    def level(self) -> float:
        """(1/alpha) log n - lambda"""
        return math.log(self.n) / self.alpha - self.lam

    @property
    def max_lambda(self) -> float:
        """Upper end of the admissible lambda range, (1/(2 alpha)) log n"""
        return math.log(self.n) / (2.0 * self.alpha)

    @property
    def admissible(self) -> bool:
        return self.lam <= self.max_lambda + 1e-12

    def with_lambda(self, lam: float) -> 'BarrierSpec':
        return BarrierSpec(self.n, lam, self.alpha, self.K, self.c_prime)

    def check_k(self, k: int) -> None:
        if not self.n < k <= self.k_max:
            raise DomainError(f"k = {k} must satisfy {self.n} < k <= {self.k_max}")

    def a(self, i: int) -> float:
        """a_i (for i <= k)"""
        return self.level if i > self.quarter else 0.0

    def b(self, i: int, k: int) -> float:
        if i <= self.quarter:
            return i ** (self.gamma / 2.0)
        return (k - i) ** (self.gamma / 2.0)

    def to_dict(self) -> Dict[str, float]:
        return {"n": self.n, "lambda": self.lam, "alpha": self.alpha, "K": self.K,
                "c_prime": self.c_prime, "gamma": self.gamma}


def brother_term(positions: np.ndarray, log_multiplicity: np.ndarray, a: float) -> np.ndarray:
    """(1 + (V - a)_+) e^{-(V - a)} per group, times the group size"""
    x = np.asarray(positions, dtype=float) - a
    return np.exp(np.asarray(log_multiplicity, dtype=float) - x) * (1.0 + np.maximum(x, 0.0))


def event_AB(realization: SpineRealization, spec: BarrierSpec, k: int) -> Tuple[bool, bool]:
    """
    Evaluate A_k and B_k along the spine taken as the candidate particle

    Raises:
        DomainError: k outside (n, floor(alpha n)] or beyond the realization
    """
    spec.check_k(k)
    if realization.n < k:
        raise DomainError(f"realization of length {realization.n} is shorter than k = {k}")
    path = realization.spine_positions[:k + 1]
    barrier = np.array([spec.a(i) for i in range(k + 1)])
    in_a = bool(np.all(path >= barrier) and path[k] <= spec.level + spec.K)

    in_b = True
    for i in range(k):
        bro = realization.brothers(i + 1)
        total = float(np.sum(brother_term(bro.positions, bro.log_multiplicities, spec.a(i))))
        if total > spec.c_prime * math.exp(-spec.b(i, k)):
            in_b = False
            break
    return in_a, in_b


def _late_deadline(total: np.ndarray, i: int, spec: BarrierSpec) -> np.ndarray:
    """Largest k for which the term at index i (> quarter) still holds"""
    with np.errstate(divide="ignore"):
        room = np.log(spec.c_prime / total)
    deadline = np.where(room >= 0.0, i + np.maximum(room, 0.0) ** (2.0 / spec.gamma), -np.inf)
    return np.where(total <= 0.0, np.inf, deadline)


@dataclass
class BarrierTracker:
    """
    Tracks E(n, lambda) for several lambdas on one forward run

    Marks per group and lambda: a_ok (barrier respected so far), early_ok
    (brother terms up to floor(alpha n / 4) hold) and deadline (the largest
    k allowed by the later brother terms). A generation k in (n, alpha n]
    hits lambda when a group has all three and ends in the terminal window.
    """
    spec: BarrierSpec
    lambdas: Sequence[float]
    hits: np.ndarray = field(init=False)
    first_hit: np.ndarray = field(init=False)

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        if self.lambdas.size == 0 or np.any(self.lambdas < 0):
            raise DomainError("lambdas must be a nonempty set of values >= 0")
        self.levels = math.log(self.spec.n) / self.spec.alpha - self.lambdas
        self.hits = np.zeros(self.lambdas.size, dtype=bool)
        self.first_hit = np.full(self.lambdas.size, -1, dtype=np.int64)

    @property
    def generations(self) -> int:
        return self.spec.k_max

    def _a(self, i: int) -> np.ndarray:
        return self.levels if i > self.spec.quarter else np.zeros_like(self.levels)

    def initial_marks(self, gen: Generation) -> Dict[str, np.ndarray]:
        rows, cols = gen.groups, self.lambdas.size
        return {
            "a_ok": (gen.positions[:, None] >= self._a(0)[None, :]),
            "early_ok": np.ones((rows, cols), dtype=bool),
            "deadline": np.full((rows, cols), np.inf),
        }

    def child_marks(self, parent_marks: Dict[str, np.ndarray], parent_positions: np.ndarray,
                    batch: BroodBatch, child_positions: np.ndarray, n: int) -> Dict[str, np.ndarray]:
        i = n - 1
        a_parent = self._a(i)
        members = int(batch.parent_index.max()) + 1 if batch.groups else 0
        a_ok = parent_marks["a_ok"] & (child_positions[:, None] >= self._a(n)[None, :])
        early_ok = parent_marks["early_ok"].copy()
        deadline = parent_marks["deadline"].copy()
        for j, a in enumerate(a_parent):
            group_terms = brother_term(child_positions, batch.log_multiplicity, a)
            brood_total = np.bincount(batch.parent_index, weights=group_terms, minlength=members)
            own = brother_term(child_positions, np.zeros(child_positions.size), a)
            total = np.maximum(brood_total[batch.parent_index] - own, 0.0)
            if i <= self.spec.quarter:
                bound = self.spec.c_prime * math.exp(-(i ** (self.spec.gamma / 2.0)))
                early_ok[:, j] &= total <= bound
            else:
                deadline[:, j] = np.minimum(deadline[:, j], _late_deadline(total, i, self.spec))
        return {"a_ok": a_ok, "early_ok": early_ok, "deadline": deadline}

    def observe(self, gen: Generation) -> None:
        k = gen.gen_index
        if gen.extinct or not self.spec.n < k <= self.spec.k_max:
            return
        window = gen.positions[:, None] <= (self.levels + self.spec.K)[None, :]
        ok = gen.marks["a_ok"] & gen.marks["early_ok"] & (gen.marks["deadline"] >= k) & window
        hit = ok.any(axis=0)
        new = hit & ~self.hits
        self.first_hit[new] = k
        self.hits |= hit
