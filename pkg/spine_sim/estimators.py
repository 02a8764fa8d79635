"""
Spine-side estimators

- estimate_barrier_event: P(E(n, lambda)) on forward trees (biased by
  truncation, small n only) or the first-moment proxy
  sum_k E[#{|x| = k : A_k}] computed on the associated walk.
- size_biased_functional: E_Q[phi] over spines, which equals
  E_P[sum_{|x|=n} e^{-V(x)} phi(x)], with forward and walk counterparts.
- grow_brother_subtrees: the full tree under Q, spine plus the forward
  subtrees of its brothers.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence

import numpy as np

from core.errors import ConfigError, CostGuardError, DomainError
from core.rng import ROOT_LABEL, mix, split
from forward_sim.generation import GenStats, Generation, compute_stats
from forward_sim.simulator import ForwardSimulator, step_generation
from forward_sim.truncation import TruncationPolicy
from harness.estimators import mean_interval, wilson_interval
from reproduction.interfaces import ReproductionLaw
from .barriers import BarrierSpec, BarrierTracker
from .spine import SpineRealization, sample_spines

logger = logging.getLogger(__name__)

WALK_BLOCK_CELLS = 1 << 22


class BarrierMode(Enum):
    FORWARD = "forward"
    FIRST_MOMENT = "first_moment"


@dataclass(frozen=True)
class BarrierEstimate:
    """
    Attributes:
        mode: forward (probability of E(n, lambda), truncation-biased) or
            first_moment (upper-bound proxy on the expected count)
    """
    mode: str
    n: int
    lam: float
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    reps: int
    K: float
    c_prime: float
    admissible: bool

    def to_row(self) -> Dict[str, Any]:
        return asdict(self)


def _law_walk_blocks(law: ReproductionLaw, n: int, reps: int,
                     rng: np.random.Generator) -> Iterator[np.ndarray]:
    """Blocks of associated-walk positions, column 0 being the origin"""
    rows = max(1, WALK_BLOCK_CELLS // max(n, 1))
    done = 0
    while done < reps:
        take = min(rows, reps - done)
        positions = np.zeros((take, n + 1))
        positions[:, 1:] = np.cumsum(law.walk_increments((take, n), rng), axis=1)
        yield positions
        done += take


def first_moment_values(positions: np.ndarray, spec: BarrierSpec) -> np.ndarray:
    """
    Per-walk value of sum_{n < k <= alpha n} e^{S_k} 1{S_i >= a_i, i <= k; S_k <= level + K}

    Args:
        positions: Walk positions with at least floor(alpha n) + 1 columns
    """
    q, k_max = spec.quarter, spec.k_max
    barrier = np.where(np.arange(k_max + 1) > q, spec.level, 0.0)
    ok = np.logical_and.accumulate(positions[:, :k_max + 1] >= barrier[None, :], axis=1)
    tail = positions[:, spec.n + 1:k_max + 1]
    inside = ok[:, spec.n + 1:] & (tail <= spec.level + spec.K)
    return np.sum(np.where(inside, np.exp(np.minimum(tail, spec.level + spec.K)), 0.0), axis=1)


def first_moment_proxy(law: ReproductionLaw, spec: BarrierSpec, lambdas: Sequence[float], reps: int,
                       rng: np.random.Generator) -> List[BarrierEstimate]:
    """First-moment proxy for each lambda, all lambdas on the same walks"""
    if reps < 2:
        raise DomainError("reps must be >= 2")
    specs = [spec.with_lambda(lam) for lam in lambdas]
    for s in specs:
        if not s.admissible:
            logger.warning(f"lambda={s.lam} exceeds the admissible range "
                           f"[0, {s.max_lambda:.3f}] for n={s.n}; proxy only")
    values: List[List[np.ndarray]] = [[] for _ in specs]
    for block in _law_walk_blocks(law, spec.k_max, reps, rng):
        for j, s in enumerate(specs):
            values[j].append(first_moment_values(block, s))
    out = []
    for s, parts in zip(specs, values):
        est = mean_interval(np.concatenate(parts))
        out.append(BarrierEstimate(BarrierMode.FIRST_MOMENT.value, s.n, s.lam, est.mean, est.stderr,
                                   est.low, est.high, reps, s.K, s.c_prime, s.admissible))
    return out


def forward_barrier_hits(law: ReproductionLaw, spec: BarrierSpec, lambdas: Sequence[float],
                         master_seed: int, replica: int,
                         policy: Optional[TruncationPolicy] = None) -> np.ndarray:
    """Indicator of E(n, lambda) per lambda on one forward tree"""
    tracker = BarrierTracker(spec, lambdas)
    ForwardSimulator(law, policy).run(split(master_seed, replica), spec.k_max, tracker)
    return tracker.hits.copy()


def forward_estimate(law: ReproductionLaw, spec: BarrierSpec, lambdas: Sequence[float], reps: int,
                     master_seed: int, policy: Optional[TruncationPolicy] = None,
                     max_n: int = 256, confidence: float = 0.95) -> List[BarrierEstimate]:
    """
    Direct estimate of P(E(n, lambda)) from reps forward trees

    Raises:
        CostGuardError: n above max_n
        DomainError: a lambda outside [0, (1/(2 alpha)) log n]
    """
    if spec.n > max_n:
        raise CostGuardError(f"forward barrier estimation is limited to n <= {max_n}",
                             estimate=float(spec.n), budget=float(max_n))
    for lam in lambdas:
        if not spec.with_lambda(lam).admissible:
            raise DomainError(f"lambda={lam} outside [0, {spec.max_lambda:.4f}] for n={spec.n}")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    hits = np.zeros(len(lambdas), dtype=np.int64)
    for r in range(reps):
        hits += forward_barrier_hits(law, spec, lambdas, master_seed, r, policy)
    out = []
    for lam, count in zip(lambdas, hits):
        p = count / reps
        low, high = wilson_interval(int(count), reps, confidence)
        out.append(BarrierEstimate(BarrierMode.FORWARD.value, spec.n, float(lam), p,
                                   math.sqrt(p * (1 - p) / reps), low, high, reps,
                                   spec.K, spec.c_prime, True))
    logger.info(f"Forward barrier estimate n={spec.n}: "
                + ", ".join(f"lambda={e.lam:g} -> {e.estimate:.4f}" for e in out))
    return out


def estimate_barrier_event(law: ReproductionLaw, n: int, lam: float, spec_consts: Dict[str, float],
                           reps: int, mode: str, seed: int,
                           policy: Optional[TruncationPolicy] = None,
                           max_n: int = 256) -> BarrierEstimate:
    """
    Estimate P(E(n, lambda)) (forward mode) or its first-moment proxy

    Args:
        spec_consts: alpha, K and c_prime
        mode: forward | first_moment
    """
    try:
        parsed = BarrierMode(mode)
    except ValueError:
        raise ConfigError(f"unknown barrier mode '{mode}' (forward | first_moment)")
    spec = BarrierSpec(n, lam, float(spec_consts.get("alpha", law.alpha if law.satisfies_stable_tail else 1.5)),
                       float(spec_consts.get("K", 5.0)), float(spec_consts.get("c_prime", 10.0)))
    if parsed is BarrierMode.FORWARD:
        return forward_estimate(law, spec, [lam], reps, seed, policy, max_n)[0]
    return first_moment_proxy(law, spec, [lam], reps, split(seed, 0).generator())[0]


@dataclass(frozen=True)
class SizeBiasedFunctional:
    """
    A functional of the spine path

    Attributes:
        spine_value: phi(positions) for an array (reps, n + 1) of paths
        forward_value: sum over a generation of e^{-V} phi, from its groups
    """
    name: str
    description: str
    spine_value: Callable[[np.ndarray, float, float], np.ndarray]
    forward_value: Callable[[Generation, float, float], float]


def _weights(gen: Generation) -> np.ndarray:
    return gen.multiplicity * np.exp(-gen.positions)


SIZE_BIASED_CATALOG: Dict[str, SizeBiasedFunctional] = {
    f.name: f for f in [
        SizeBiasedFunctional(
            "unit", "1",
            lambda p, a, b: np.ones(p.shape[0]),
            lambda g, a, b: float(_weights(g).sum())),
        SizeBiasedFunctional(
            "spine_stay_above", "1{min_i V(w_i) >= -a}",
            lambda p, a, b: (p.min(axis=1) >= -a).astype(float),
            lambda g, a, b: float(_weights(g)[g.path_min >= -a].sum())),
        SizeBiasedFunctional(
            "spine_end_below", "1{V(w_n) <= b}",
            lambda p, a, b: (p[:, -1] <= b).astype(float),
            lambda g, a, b: float(_weights(g)[g.positions <= b].sum())),
        SizeBiasedFunctional(
            "terminal_decay", "e^{-V(w_n)}",
            lambda p, a, b: np.exp(-p[:, -1]),
            lambda g, a, b: float(np.sum(g.multiplicity * np.exp(-2.0 * g.positions)))),
    ]
}


def get_size_biased(name: str) -> SizeBiasedFunctional:
    try:
        return SIZE_BIASED_CATALOG[name]
    except KeyError:
        raise ConfigError(f"functional '{name}' is not in the size-biased catalog "
                          f"({', '.join(SIZE_BIASED_CATALOG)})")


def size_biased_functional(law: ReproductionLaw, n: int, functional_id: str, reps: int, seed: int,
                           a: float = 1.0, b: float = 0.0, confidence: float = 0.95):
    """
    E_Q[phi] over reps spines of length n

    Returns:
        MeanEstimate
    """
    functional = get_size_biased(functional_id)
    if reps < 2:
        raise DomainError("reps must be >= 2")
    batch = sample_spines(law, n, reps, split(seed, 0).generator())
    return mean_interval(functional.spine_value(batch.positions, a, b), confidence)


def forward_functional(law: ReproductionLaw, n: int, functional_id: str, reps: int, seed: int,
                       a: float = 1.0, b: float = 0.0, policy: Optional[TruncationPolicy] = None,
                       confidence: float = 0.95):
    """E_P[sum_{|x|=n} e^{-V(x)} phi(x)] over reps forward trees"""
    functional = get_size_biased(functional_id)
    if reps < 2:
        raise DomainError("reps must be >= 2")
    sim = ForwardSimulator(law, policy)
    values = []
    for r in range(reps):
        final = sim.run(split(seed, r), n).final
        values.append(0.0 if final.extinct or final.gen_index < n else functional.forward_value(final, a, b))
    return mean_interval(values, confidence)


def walk_functional(law: ReproductionLaw, n: int, functional_id: str, reps: int,
                    rng: np.random.Generator, a: float = 1.0, b: float = 0.0, confidence: float = 0.95):
    """E[phi(S)] on the associated walk"""
    functional = get_size_biased(functional_id)
    parts = [functional.spine_value(block, a, b) for block in _law_walk_blocks(law, n, reps, rng)]
    return mean_interval(np.concatenate(parts), confidence)


@dataclass
class QTree:
    """
    Generation statistics of the tree under Q

    Attributes:
        stats: GenStats for generations 0..n
        complete_through: Last generation that includes every brother subtree
        capped_brothers: Brother groups larger than the population cap
        stopped_brothers: Subtrees not grown because they sit above the ceiling
    """
    stats: List[GenStats] = field(default_factory=list)
    complete_through: int = 0
    capped_brothers: int = 0
    stopped_brothers: int = 0


def grow_brother_subtrees(realization: SpineRealization, law: ReproductionLaw, depth: int,
                          policy: Optional[TruncationPolicy] = None, seed: int = 0,
                          beta: float = 1.0) -> QTree:
    """
    Grow the forward subtree of every brother of the spine up to depth generations

    Brothers born at generation j contribute to generations j..min(n, j + depth).
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    policy = policy or TruncationPolicy()
    n = realization.n
    counter = split(seed, 0).counter()
    spine_min = np.minimum.accumulate(realization.spine_positions)
    parts: Dict[int, List[Generation]] = {g: [] for g in range(n + 1)}
    result = QTree(complete_through=min(n, depth + 1))

    for g in range(n + 1):
        parts[g].append(Generation(
            np.array([realization.spine_positions[g]]), np.ones(1, dtype=np.int64),
            np.zeros(1, dtype=np.int64), np.array([spine_min[g]]),
            np.array([ROOT_LABEL], dtype=np.uint64), g))

    for idx in range(realization.brother_step.size):
        j = int(realization.brother_step[idx])
        pos = float(realization.brother_positions[idx])
        mult = float(realization.brother_multiplicity[idx])
        if mult > policy.max_population:
            result.capped_brothers += 1
            mult = float(policy.max_population)
        gen = Generation(np.array([pos]), np.array([int(mult)], dtype=np.int64),
                         np.zeros(1, dtype=np.int64), np.array([min(spine_min[j - 1], pos)]),
                         np.array([mix(ROOT_LABEL, np.uint64(idx + 1))], dtype=np.uint64), j)
        parts[j].append(gen)
        while gen.gen_index < min(n, j + depth) and not gen.extinct:
            if gen.positions.min() >= policy.ceiling(gen.gen_index + 1):
                result.stopped_brothers += 1
                break
            gen = step_generation(gen, law, policy, counter)
            parts[gen.gen_index].append(gen)

    for g in range(n + 1):
        merged = Generation(
            np.concatenate([p.positions for p in parts[g]]),
            np.concatenate([p.multiplicity for p in parts[g]]),
            np.concatenate([p.parent_index for p in parts[g]]),
            np.concatenate([p.path_min for p in parts[g]]),
            np.concatenate([p.labels for p in parts[g]]),
            g,
            truncated_count=sum(p.truncated_count for p in parts[g]),
            truncated_mass=sum(p.truncated_mass for p in parts[g]),
            capped_count=sum(p.capped_count for p in parts[g]),
            truncated_groups=sum(p.truncated_groups for p in parts[g]),
        )
        result.stats.append(compute_stats(merged, beta))
    return result
