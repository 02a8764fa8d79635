"""
Forward Simulator

Generation-by-generation simulation of the branching random walk. Each
generation is built in chunks of parents; children above the ceiling are
dropped at birth and a running pool keeps the lowest max_population
children, so the whole untruncated generation is never materialized.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Protocol

import numpy as np
import pandas as pd

from core.config import ConfigManager
from core.errors import DomainError, PopulationOverflowError
from core.rng import CounterStream, ReplicaStream, split, within_group_index
from reproduction.interfaces import BroodBatch, ReproductionLaw
from .generation import GENSTATS_FIELDS, GenStats, Generation, compute_stats, stats_frame_rows
from .truncation import TruncationPolicy, cap_lowest

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "M_n", "W_n", "W_n_beta", "D_n", "population", "truncated_count",
               "replica", "seed", "truncated_mass", "capped_count", "truncated_groups"]


class PathTracker(Protocol):
    """Per-particle path functionals carried along a forward run"""

    def initial_marks(self, gen: Generation) -> Dict[str, np.ndarray]:
        ...

    def child_marks(self, parent_marks: Dict[str, np.ndarray], parent_positions: np.ndarray,
                    batch: BroodBatch, child_positions: np.ndarray, n: int) -> Dict[str, np.ndarray]:
        """
        Marks of newly born child groups

        Args:
            parent_marks: Marks of each child's parent (one row per child group)
            parent_positions: Position of each child's parent
            batch: Brood batch of the chunk (parent_index indexes the chunk's parents)
            child_positions: Absolute child positions
            n: Generation of the children
        """
        ...

    def observe(self, gen: Generation) -> None:
        ...


@dataclass
class _Pool:
    """Children accepted so far for the generation being built"""
    positions: List[np.ndarray] = field(default_factory=list)
    labels: List[np.ndarray] = field(default_factory=list)
    multiplicity: List[np.ndarray] = field(default_factory=list)
    log_multiplicity: List[np.ndarray] = field(default_factory=list)
    parent: List[np.ndarray] = field(default_factory=list)
    path_min: List[np.ndarray] = field(default_factory=list)
    thinned: List[np.ndarray] = field(default_factory=list)
    marks: Dict[str, List[np.ndarray]] = field(default_factory=dict)

    def add(self, positions, labels, multiplicity, log_multiplicity, parent, path_min, thinned, marks):
        self.positions.append(positions)
        self.labels.append(labels)
        self.multiplicity.append(multiplicity)
        self.log_multiplicity.append(log_multiplicity)
        self.parent.append(parent)
        self.path_min.append(path_min)
        self.thinned.append(thinned)
        for key, value in marks.items():
            self.marks.setdefault(key, []).append(value)

    def collapse(self) -> Dict[str, Any]:
        out = {
            "positions": np.concatenate(self.positions) if self.positions else np.empty(0),
            "labels": np.concatenate(self.labels) if self.labels else np.empty(0, dtype=np.uint64),
            "multiplicity": np.concatenate(self.multiplicity) if self.multiplicity else np.empty(0),
            "log_multiplicity": (np.concatenate(self.log_multiplicity)
                                 if self.log_multiplicity else np.empty(0)),
            "parent": np.concatenate(self.parent) if self.parent else np.empty(0, dtype=np.int64),
            "path_min": np.concatenate(self.path_min) if self.path_min else np.empty(0),
            "thinned": np.concatenate(self.thinned) if self.thinned else np.empty(0, dtype=bool),
            "marks": {k: np.concatenate(v) for k, v in self.marks.items()},
        }
        return out

    def reset(self, data: Dict[str, Any]) -> None:
        self.positions = [data["positions"]]
        self.labels = [data["labels"]]
        self.multiplicity = [data["multiplicity"]]
        self.log_multiplicity = [data["log_multiplicity"]]
        self.parent = [data["parent"]]
        self.path_min = [data["path_min"]]
        self.thinned = [data["thinned"]]
        self.marks = {k: [v] for k, v in data["marks"].items()}


def _apply_cap(data: Dict[str, Any], max_population: int) -> Dict[str, Any]:
    rows, kept = cap_lowest(data["positions"], data["labels"], data["multiplicity"], max_population)
    if rows.size == data["positions"].size and np.array_equal(kept, data["multiplicity"]):
        return data
    thinned = data["thinned"][rows] | (kept < data["multiplicity"][rows])
    log_kept = np.where(kept < data["multiplicity"][rows], np.log(np.maximum(kept, 1.0)),
                        data["log_multiplicity"][rows])
    return {
        "positions": data["positions"][rows],
        "labels": data["labels"][rows],
        "multiplicity": kept,
        "log_multiplicity": log_kept,
        "parent": data["parent"][rows],
        "path_min": data["path_min"][rows],
        "thinned": thinned,
        "marks": {k: v[rows] for k, v in data["marks"].items()},
    }


def step_generation(gen: Generation, law: ReproductionLaw, policy: TruncationPolicy,
                    counter: CounterStream, tracker: Optional[PathTracker] = None) -> Generation:
    """
    Build generation n+1 from generation n

    Args:
        gen: Nonempty current generation
        law: Reproduction law
        policy: Ceiling and population cap
        counter: Counter-based uniform source of the replica
        tracker: Optional path tracker whose marks ride along

    Returns:
        The next generation, possibly empty
    """
    if gen.extinct:
        raise DomainError("step_generation needs a nonempty generation")
    n_next = gen.gen_index + 1
    policy.check(n_next, float(gen.positions.min()))
    ceiling = policy.ceiling(n_next)

    group_index, member_index = within_group_index(gen.multiplicity)
    member_labels = CounterStream.member_labels(gen.labels[group_index], member_index)
    k = law.uniforms_per_brood

    pool = _Pool()
    passed_groups = 0
    passed_particles = 0.0
    passed_mass = 0.0
    ceiling_groups = 0
    ceiling_particles = 0.0
    ceiling_mass = 0.0

    for start in range(0, member_labels.size, policy.chunk_size):
        labels = member_labels[start:start + policy.chunk_size]
        groups = group_index[start:start + policy.chunk_size]
        uniforms = np.column_stack([counter.uniforms(labels, j) for j in range(k)])
        batch = law.draw_broods(uniforms)
        if batch.groups == 0:
            continue
        parent_group = groups[batch.parent_index]
        parent_pos = gen.positions[parent_group]
        child_pos = parent_pos + batch.displacement
        child_labels = CounterStream.child_labels(labels[batch.parent_index], batch.rank)
        child_marks = {}
        if tracker is not None:
            parent_marks = {key: value[parent_group] for key, value in gen.marks.items()}
            child_marks = tracker.child_marks(parent_marks, parent_pos, batch, child_pos, n_next)

        keep = child_pos <= ceiling
        dropped = ~keep
        if dropped.any():
            ceiling_groups += int(dropped.sum())
            ceiling_particles += float(np.sum(batch.multiplicity[dropped]))
            ceiling_mass += float(np.sum(np.exp(batch.log_multiplicity[dropped] - child_pos[dropped])))
        if not keep.any():
            continue
        pos = child_pos[keep]
        logm = batch.log_multiplicity[keep]
        passed_groups += int(keep.sum())
        passed_particles += float(np.sum(batch.multiplicity[keep]))
        passed_mass += float(np.sum(np.exp(logm - pos)))
        pool.add(pos, child_labels[keep], batch.multiplicity[keep], logm, parent_group[keep],
                 np.minimum(gen.path_min[parent_group[keep]], pos), np.zeros(pos.size, dtype=bool),
                 {key: value[keep] for key, value in child_marks.items()})

        data = pool.collapse()
        if float(np.sum(data["multiplicity"])) > policy.max_population:
            pool.reset(_apply_cap(data, policy.max_population))

    data = pool.collapse()
    total = float(np.sum(data["multiplicity"]))
    if total > policy.max_population:
        raise PopulationOverflowError(f"generation {n_next} holds {total:.3g} particles after capping")
    kept_mass = float(np.sum(np.exp(data["log_multiplicity"] - data["positions"])))
    capped_groups = passed_groups - data["positions"].size + int(data["thinned"].sum())
    capped_count = max(passed_particles - total, 0.0) if capped_groups else 0.0
    cap_mass = max(passed_mass - kept_mass, 0.0) if capped_groups else 0.0

    nxt = Generation(
        positions=data["positions"],
        multiplicity=data["multiplicity"].astype(np.int64),
        parent_index=data["parent"].astype(np.int64),
        path_min=data["path_min"],
        labels=data["labels"].astype(np.uint64),
        gen_index=n_next,
        marks=data["marks"],
        truncated_count=ceiling_particles + capped_count,
        truncated_mass=ceiling_mass + cap_mass,
        capped_count=capped_count,
        truncated_groups=ceiling_groups + capped_groups,
    )
    if nxt.truncated_groups:
        logger.debug(f"Generation {n_next}: {ceiling_groups} groups above C={ceiling:.3g}, "
                     f"{capped_groups} capped, population {nxt.population}")
    return nxt


@dataclass
class ForwardRun:
    """Statistics of one forward run and its last generation"""
    stats: List[GenStats]
    final: Generation
    seed: str = ""
    attempt: int = 0

    @property
    def survived(self) -> bool:
        return not self.final.extinct

    @property
    def truncated_mass(self) -> float:
        return float(sum(s.truncated_mass for s in self.stats))


class ForwardSimulator:
    """Runs forward trees for one law under one truncation policy"""

    def __init__(self, law: ReproductionLaw, policy: Optional[TruncationPolicy] = None, beta: float = 1.0):
        if beta < 0:
            raise DomainError("beta must be >= 0")
        self.law = law
        self.policy = policy or TruncationPolicy()
        self.beta = float(beta)
        self.logger = logging.getLogger("ForwardSimulator")

    @classmethod
    def from_config(cls, law: ReproductionLaw, config: Optional[ConfigManager] = None,
                    beta: Optional[float] = None) -> 'ForwardSimulator':
        config = config or ConfigManager()
        policy = TruncationPolicy.from_config(config.section("truncation"))
        return cls(law, policy, config.get("forward.beta", 1.0) if beta is None else beta)

    def run(self, stream: ReplicaStream, n_max: int, tracker: Optional[PathTracker] = None,
            on_generation: Optional[Callable[[Generation], None]] = None) -> ForwardRun:
        """
        Simulate generations 0..n_max, stopping early on extinction

        Returns:
            ForwardRun whose stats start at n = 0 and include the extinct generation
        """
        if n_max < 1:
            raise DomainError("n_max must be >= 1")
        counter = stream.counter()
        gen = Generation.root()
        if tracker is not None:
            gen.marks = tracker.initial_marks(gen)
        stats = [compute_stats(gen, self.beta)]
        self._observe(gen, tracker, on_generation)
        while gen.gen_index < n_max and not gen.extinct:
            gen = step_generation(gen, self.law, self.policy, counter, tracker)
            stats.append(compute_stats(gen, self.beta))
            self._observe(gen, tracker, on_generation)
        if gen.extinct:
            self.logger.debug(f"Replica {stream.seed_label} extinct at generation {gen.gen_index}")
        return ForwardRun(stats, gen, stream.seed_label, stream.retry)

    def run_to_generations(self, stream: ReplicaStream, checkpoints: Iterable[int]) -> Dict[int, GenStats]:
        """Statistics at the requested generations (missing after extinction)"""
        checkpoints = sorted(set(int(c) for c in checkpoints))
        run = self.run(stream, checkpoints[-1])
        wanted = set(checkpoints)
        return {s.n: s for s in run.stats if s.n in wanted}

    @staticmethod
    def _observe(gen, tracker, on_generation):
        if tracker is not None:
            tracker.observe(gen)
        if on_generation is not None:
            on_generation(gen)


def run_forward(law: ReproductionLaw, n_max: int, policy: Optional[TruncationPolicy] = None,
                beta: float = 1.0, seed: int = 0) -> List[GenStats]:
    """GenStats of generations 0..n_max (or until extinction) for replica 0 of seed"""
    return ForwardSimulator(law, policy, beta).run(split(seed, 0), n_max).stats


def genstats_frame(runs: Iterable[ForwardRun], replicas: Iterable[int]) -> pd.DataFrame:
    rows = []
    for run, replica in zip(runs, replicas):
        rows.extend(stats_frame_rows(run.stats, replica, run.seed))
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_genstats_csv(path, frame: pd.DataFrame) -> None:
    """Write GenStats rows in the documented column order"""
    frame[CSV_COLUMNS].to_csv(path, index=False, float_format="%.17g")


def read_genstats_csv(path) -> List[GenStats]:
    frame = pd.read_csv(path, dtype={"seed": str})
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise DomainError(f"GenStats CSV lacks columns {missing}")
    return [GenStats(**{k: row[k] for k in GENSTATS_FIELDS}) for row in frame.to_dict("records")]


def d_n_stabilization(stats: List[GenStats], ns: Iterable[int]) -> Dict[int, float]:
    """|D_{2n} - D_n| for each n whose doubled generation is present"""
    by_n = {s.n: s for s in stats}
    out = {}
    for n in ns:
        if n in by_n and 2 * n in by_n and by_n[2 * n].population > 0:
            out[n] = abs(by_n[2 * n].D_n - by_n[n].D_n)
    return out
