"""
Generation records and per-generation statistics

A generation stores co-located siblings as groups: one row per group, with
an integer multiplicity. The population is the total multiplicity.
"""

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Sequence

import numpy as np

from core.rng import ROOT_LABEL


@dataclass
class Generation:
    """
    Living particles at generation gen_index

    Attributes:
        positions: Group positions V(x)
        multiplicity: Group sizes (int64)
        parent_index: Row of the parent group in the previous generation (-1 at the root)
        path_min: min over the ancestry of V, the root's 0 included
        labels: 64-bit counter labels driving each group's randomness
        gen_index: Generation number n
        marks: Per-group arrays maintained by path trackers
        truncated_count: Particles (summed group sizes) removed while building this generation
        truncated_mass: Sum of e^{-V} over removed children
        capped_count: Particles removed by the population cap
        truncated_groups: Child groups removed wholly or thinned
    """
    positions: np.ndarray
    multiplicity: np.ndarray
    parent_index: np.ndarray
    path_min: np.ndarray
    labels: np.ndarray
    gen_index: int
    marks: Dict[str, np.ndarray] = field(default_factory=dict)
    truncated_count: float = 0.0
    truncated_mass: float = 0.0
    capped_count: float = 0.0
    truncated_groups: int = 0

    @classmethod
    def root(cls, position: float = 0.0) -> 'Generation':
        return cls(
            positions=np.array([position]),
            multiplicity=np.ones(1, dtype=np.int64),
            parent_index=np.full(1, -1, dtype=np.int64),
            path_min=np.array([min(position, 0.0)]),
            labels=np.array([ROOT_LABEL], dtype=np.uint64),
            gen_index=0,
        )

    @property
    def groups(self) -> int:
        return int(self.positions.size)

    @property
    def population(self) -> int:
        return int(self.multiplicity.sum())

    @property
    def extinct(self) -> bool:
        return self.positions.size == 0

    def select(self, index: np.ndarray) -> 'Generation':
        """Sub-generation with the given rows (marks included)"""
        return Generation(
            self.positions[index], self.multiplicity[index], self.parent_index[index],
            self.path_min[index], self.labels[index], self.gen_index,
            {k: v[index] for k, v in self.marks.items()},
            self.truncated_count, self.truncated_mass, self.capped_count, self.truncated_groups,
        )


@dataclass(frozen=True)
class GenStats:
    """Statistics of one generation"""
    n: int
    M_n: float
    W_n: float
    W_n_beta: float
    D_n: float
    population: int
    truncated_count: float
    truncated_mass: float = 0.0
    capped_count: float = 0.0
    truncated_groups: int = 0

    def to_row(self) -> Dict[str, float]:
        return asdict(self)


GENSTATS_FIELDS = [f.name for f in fields(GenStats)]


def compute_stats(gen: Generation, beta: float) -> GenStats:
    """M_n, W_n, W_n^beta and D_n of a generation"""
    if gen.extinct:
        return GenStats(gen.gen_index, math.inf, 0.0, 0.0, 0.0, 0,
                        gen.truncated_count, gen.truncated_mass, gen.capped_count,
                        gen.truncated_groups)
    weights = gen.multiplicity * np.exp(-gen.positions)
    w_n = float(weights.sum())
    w_beta = float(weights[gen.path_min >= -beta].sum())
    d_n = float(np.sum(gen.positions * weights))
    return GenStats(gen.gen_index, float(gen.positions.min()), w_n, w_beta, d_n,
                    gen.population, gen.truncated_count, gen.truncated_mass, gen.capped_count,
                    gen.truncated_groups)


def scaled_beta_max(stats: Sequence[GenStats], alpha: float, start: int, stop: int) -> float:
    """max over start <= k <= stop of k^{1/alpha} W_k^beta (0 after extinction)"""
    best = 0.0
    for s in stats:
        if start <= s.n <= stop:
            best = max(best, s.n ** (1.0 / alpha) * s.W_n_beta)
    return best


def stats_frame_rows(stats: Sequence[GenStats], replica: int, seed: str) -> List[Dict[str, float]]:
    rows = []
    for s in stats:
        row = s.to_row()
        row["replica"] = replica
        row["seed"] = seed
        rows.append(row)
    return rows
