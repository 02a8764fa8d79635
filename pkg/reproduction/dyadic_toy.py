"""
Dyadic toy law

Every particle has exactly two children, each displaced by -u with
probability theta and by +u otherwise, where cosh(u) = 2 and
theta = e^{-u} / 4. The law is in the boundary case and its associated walk
is the fair +-u walk; it has no heavy tail and serves as an exact oracle.
"""

import itertools
import math
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from .interfaces import BroodBatch, ReproductionLaw, TiltedBatch

U = math.log(2.0 + math.sqrt(3.0))
THETA = (2.0 - math.sqrt(3.0)) / 4.0


class DyadicToyLaw(ReproductionLaw):
    """Two i.i.d. children at +-u"""

    name = "dyadic"

    def __init__(self):
        self.u = U
        self.theta = THETA
        # tilted outcomes (s1, s2) with weight P(s1) P(s2) (e^{-s1} + e^{-s2})
        outcomes = list(itertools.product((-self.u, self.u), repeat=2))
        weights = []
        for s1, s2 in outcomes:
            p = self._p(s1) * self._p(s2)
            weights.append(p * (math.exp(-s1) + math.exp(-s2)))
        self._tilted_outcomes = np.array(outcomes)
        self._tilted_cdf = np.cumsum(weights)

    def _p(self, s: float) -> float:
        return self.theta if s < 0 else 1.0 - self.theta

    @property
    def uniforms_per_brood(self) -> int:
        return 2

    @property
    def uniforms_per_tilted_brood(self) -> int:
        return 2

    def mean_weight(self) -> float:
        """E[sum e^{-V}], equal to 1"""
        return 2.0 * (self.theta * math.exp(self.u) + (1.0 - self.theta) * math.exp(-self.u))

    def mean_derivative(self) -> float:
        """E[sum V e^{-V}], equal to 0"""
        return 2.0 * (-self.u * self.theta * math.exp(self.u)
                      + self.u * (1.0 - self.theta) * math.exp(-self.u))

    def w1_support(self) -> List[Tuple[float, float]]:
        """(value, probability) pairs of W_1"""
        eu, emu = math.exp(self.u), math.exp(-self.u)
        th = self.theta
        return [(2.0 * eu, th * th), (eu + emu, 2.0 * th * (1.0 - th)), (2.0 * emu, (1.0 - th) ** 2)]

    def draw_broods(self, uniforms: np.ndarray) -> BroodBatch:
        uniforms = np.atleast_2d(uniforms)
        parents = uniforms.shape[0]
        disp = np.where(uniforms[:, :2] < self.theta, -self.u, self.u).reshape(-1)
        parent_index = np.repeat(np.arange(parents), 2)
        rank = np.tile(np.arange(2, dtype=np.int64), parents)
        ones = np.ones(2 * parents)
        return BroodBatch(parent_index, rank, disp, ones, np.zeros(2 * parents))

    def tilted_broods(self, uniforms: np.ndarray) -> TiltedBatch:
        uniforms = np.atleast_2d(uniforms)
        rows = uniforms.shape[0]
        pick = np.minimum(np.searchsorted(self._tilted_cdf, uniforms[:, 0] * self._tilted_cdf[-1],
                                          side="right"), 3)
        pair = self._tilted_outcomes[pick]
        w1, w2 = np.exp(-pair[:, 0]), np.exp(-pair[:, 1])
        first = uniforms[:, 1] < w1 / (w1 + w2)
        spine = np.where(first, pair[:, 0], pair[:, 1])
        brother = np.where(first, pair[:, 1], pair[:, 0])
        ones = np.ones(rows)
        return TiltedBatch(spine, ones, np.where(first, 0, 1).astype(np.int64),
                           np.arange(rows), brother, ones.copy(), np.zeros(rows))

    def walk_increments(self, size, rng: np.random.Generator) -> np.ndarray:
        return np.where(rng.random(size) < 0.5, -self.u, self.u)

    def step_cdf(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.where(s < -self.u, 0.0, np.where(s < self.u, 0.5, 1.0))

    def intensity_targets(self) -> List[Tuple[str, float, float, float]]:
        return [
            ("minus_u", -self.u, -self.u, 0.5),
            ("plus_u", self.u, self.u, 0.5),
            ("beyond_u", 1.5 * self.u, math.inf, 0.0),
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"family": self.name, "u": self.u, "theta": self.theta}

    def exact_tree_expectation(self, n: int, leaf_value: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
        """
        E[sum over generation-n particles of leaf_value(V, path_min)] by full enumeration

        Enumerates every sign pattern of the 2 + 4 + ... + 2^n displacements,
        so it is limited to n <= 3.
        """
        if not 1 <= n <= 3:
            raise ValueError("exact enumeration supports 1 <= n <= 3")
        edges = 2 ** (n + 1) - 2
        patterns = np.array(list(itertools.product((0, 1), repeat=edges)), dtype=bool)
        disp = np.where(patterns, -self.u, self.u)
        prob = np.prod(np.where(patterns, self.theta, 1.0 - self.theta), axis=1)

        # generation g uses edges [2^g - 2, 2^{g+1} - 2); child j of generation g has parent j // 2
        positions = np.zeros((patterns.shape[0], 1))
        path_min = np.zeros_like(positions)
        for g in range(1, n + 1):
            start = 2 ** g - 2
            width = 2 ** g
            parent = np.arange(width) // 2
            positions = positions[:, parent] + disp[:, start:start + width]
            path_min = np.minimum(path_min[:, parent], positions)
        return float(np.sum(prob * leaf_value(positions, path_min).sum(axis=1)))


def make_dyadic_toy() -> DyadicToyLaw:
    return DyadicToyLaw()
