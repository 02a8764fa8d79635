"""
Many-to-one consistency check

Tree side: E[sum_{|x|=n} g(V(x_1), ..., V(x_n))] from small forward trees.
Walk side: E[e^{S_n} g(S_1, ..., S_n)] from the associated walk.

Co-located groups of size m are carried on the tree side by min(m, r)
representatives of weight m / min(m, r) each. Group members have i.i.d.
subtrees, so the thinned sum has the same expectation as the full one.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from core.errors import DomainError
from harness.estimators import MeanEstimate, intervals_overlap, mean_interval
from .dyadic_toy import DyadicToyLaw
from .functionals import CatalogFunctional, get_functional
from .interfaces import ReproductionLaw

logger = logging.getLogger(__name__)

MAX_TREE_N = 10
TREE_CHUNK = 2000


@dataclass(frozen=True)
class ManyToOneResult:
    functional: str
    n: int
    reps: int
    lhs: MeanEstimate
    rhs: MeanEstimate
    consistent: bool
    exact: Optional[float] = None

    def to_row(self) -> Dict[str, Any]:
        return {
            "functional": self.functional, "n": self.n, "reps": self.reps,
            "lhs": self.lhs.mean, "lhs_low": self.lhs.low, "lhs_high": self.lhs.high,
            "rhs": self.rhs.mean, "rhs_low": self.rhs.low, "rhs_high": self.rhs.high,
            "consistent": self.consistent,
            "exact": self.exact if self.exact is not None else float("nan"),
        }


def thinned_tree_sums(law: ReproductionLaw, n: int, trees: int, rng: np.random.Generator,
                      functional: CatalogFunctional, a: float = 1.0, b: float = 0.0,
                      representatives: int = 4) -> np.ndarray:
    """Per-tree sums of g over generation n on thinned trees"""
    if representatives < 1:
        raise DomainError("representatives must be >= 1")
    sums = np.zeros(trees)
    for start in range(0, trees, TREE_CHUNK):
        count = min(TREE_CHUNK, trees - start)
        tree_id = np.arange(count)
        position = np.zeros(count)
        path_min = np.zeros(count)
        log_weight = np.zeros(count)
        for _ in range(n):
            if tree_id.size == 0:
                break
            batch = law.draw_broods(rng.random((tree_id.size, law.uniforms_per_brood)))
            keep = np.minimum(batch.multiplicity, representatives).astype(np.int64)
            group_log_weight = batch.log_multiplicity - np.log(keep)
            parent = np.repeat(batch.parent_index, keep)
            child_pos = position[parent] + np.repeat(batch.displacement, keep)
            path_min = np.minimum(path_min[parent], child_pos)
            log_weight = log_weight[parent] + np.repeat(group_log_weight, keep)
            tree_id = tree_id[parent]
            position = child_pos
        if tree_id.size:
            contrib = np.exp(log_weight + functional.log_tree_value(position, path_min, a, b))
            sums[start:start + count] = np.bincount(tree_id, weights=contrib, minlength=count)
    return sums


def walk_side_values(law: ReproductionLaw, n: int, reps: int, rng: np.random.Generator,
                     functional: CatalogFunctional, a: float = 1.0, b: float = 0.0) -> np.ndarray:
    """e^{S_n} g(S) for reps associated walks"""
    values = np.empty(reps)
    rows = max(1, (1 << 20) // max(n, 1))
    for start in range(0, reps, rows):
        count = min(rows, reps - start)
        steps = law.walk_increments((count, n), rng)
        walks = np.cumsum(steps, axis=1)
        path_min = np.minimum(walks.min(axis=1), 0.0)
        values[start:start + count] = functional.walk_value(walks[:, -1], path_min, a, b)
    return values


def exact_dyadic_value(law: DyadicToyLaw, functional: CatalogFunctional, n: int,
                       a: float = 1.0, b: float = 0.0) -> Optional[float]:
    if n > 3:
        return None
    return law.exact_tree_expectation(n, lambda pos, pmin: functional.tree_value(pos, pmin, a, b))


def many_to_one_check(law: ReproductionLaw, functional_id: str, n: int, reps: int,
                      rng: np.random.Generator, a: float = 1.0, b: float = 0.0,
                      representatives: int = 4, walk_reps: Optional[int] = None,
                      confidence: float = 0.95, max_n: int = MAX_TREE_N) -> ManyToOneResult:
    """
    Compare both sides of the many-to-one identity for a catalog functional

    Args:
        reps: Number of trees on the tree side
        walk_reps: Number of walks on the walk side (defaults to reps)

    Returns:
        ManyToOneResult; consistent when the two confidence intervals overlap
    """
    functional = get_functional(functional_id)
    if not 1 <= n <= max_n:
        raise DomainError(f"tree-side evaluation needs 1 <= n <= {max_n}")
    if reps < 2:
        raise DomainError("reps must be >= 2")
    lhs = mean_interval(thinned_tree_sums(law, n, reps, rng, functional, a, b, representatives),
                        confidence)
    rhs = mean_interval(walk_side_values(law, n, walk_reps or reps, rng, functional, a, b),
                        confidence)
    exact = exact_dyadic_value(law, functional, n, a, b) if isinstance(law, DyadicToyLaw) else None

    if rhs.stderr == 0.0 and lhs.stderr == 0.0:
        consistent = abs(lhs.mean - rhs.mean) <= 1e-12
    else:
        consistent = intervals_overlap((lhs.low, lhs.high), (rhs.low, rhs.high))
    logger.info(f"many-to-one {functional_id} n={n}: tree {lhs.mean:.4f} "
                f"[{lhs.low:.4f}, {lhs.high:.4f}] walk {rhs.mean:.4f} [{rhs.low:.4f}, {rhs.high:.4f}]")
    return ManyToOneResult(functional_id, n, reps, lhs, rhs, consistent, exact)
