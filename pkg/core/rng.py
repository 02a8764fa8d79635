"""
Deterministic Random Streams

Two kinds of randomness are used across the toolkit:

- Sequential streams: a numpy Generator per replica, derived from
  (master_seed, replica_index) by `split`. Walk and spine samplers consume
  these in a fixed order so identical inputs give bit-identical outputs.
- Counter-based draws for forward trees: every particle carries a 64-bit
  label and its brood uniforms are hashes of (key, label, draw index). A
  particle's offspring therefore do not depend on which other particles are
  still alive, and a truncated tree is an exact sub-tree of the untruncated
  one built from the same key.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0

ROOT_LABEL = np.uint64(0x243F6A8885A308D3)


def splitmix64(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer over uint64 arrays (wrapping arithmetic)"""
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLDEN
        z = (z ^ (z >> _S30)) * _MUL1
        z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


def mix(a: np.ndarray, b) -> np.ndarray:
    """Combine two uint64 values into one well-mixed label"""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    return splitmix64(a ^ splitmix64(b))


def to_unit_interval(h: np.ndarray) -> np.ndarray:
    """Map uint64 hashes to floats in [0, 1) using the top 53 bits"""
    return (np.asarray(h, dtype=np.uint64) >> _S11).astype(np.float64) * _TWO_M53


@dataclass(frozen=True)
class CounterStream:
    """Counter-based uniform source keyed by a replica key"""
    key: np.uint64

    def uniforms(self, labels: np.ndarray, draw: int) -> np.ndarray:
        """One uniform per label for the given draw index"""
        salted = mix(np.uint64(self.key), np.uint64(draw + 1))
        return to_unit_interval(mix(labels, salted))

    @staticmethod
    def child_labels(parent_labels: np.ndarray, rank) -> np.ndarray:
        """Label of the rank-th child group of each parent (rank may be an array)"""
        rank = np.asarray(rank, dtype=np.uint64)
        return mix(parent_labels, rank * np.uint64(2) + np.uint64(1))

    @staticmethod
    def member_labels(group_labels: np.ndarray, members: np.ndarray) -> np.ndarray:
        """Label of member k of each co-located group"""
        return mix(group_labels, np.asarray(members, dtype=np.uint64) * np.uint64(2) + np.uint64(2))


@dataclass(frozen=True)
class ReplicaStream:
    """Everything random about one replica, derived from (master_seed, replica_index)"""
    master_seed: int
    replica_index: int
    seed_sequence: np.random.SeedSequence = field(repr=False, compare=False)
    retry: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh sequential generator; two calls give identical streams"""
        return np.random.Generator(np.random.PCG64(self.seed_sequence))

    @property
    def key(self) -> np.uint64:
        """64-bit key for counter-based draws"""
        return np.uint64(self.seed_sequence.generate_state(1, dtype=np.uint64)[0])

    def counter(self) -> CounterStream:
        return CounterStream(self.key)

    @property
    def seed_label(self) -> str:
        label = f"{self.master_seed}:{self.replica_index}"
        return f"{label}:{self.retry}" if self.retry else label

    def attempt(self, index: int) -> 'ReplicaStream':
        """Stream for the index-th attempt of this replica; attempt 0 is the replica itself"""
        if index == 0:
            return self
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.replica_index, int(index)))
        return ReplicaStream(self.master_seed, self.replica_index, seq, int(index))


def split(master_seed: int, replica_index: int) -> ReplicaStream:
    """
    Documented splitting function for replica streams.

    The stream of replica r under master seed s is
    SeedSequence(s, spawn_key=(r,)); it does not depend on worker count or
    on the order in which replicas complete.
    """
    if master_seed < 0 or replica_index < 0:
        raise ValueError("master_seed and replica_index must be non-negative")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(replica_index),))
    return ReplicaStream(int(master_seed), int(replica_index), seq)


def generator(seed: int) -> np.random.Generator:
    """Sequential generator for a single seed (replica 0 of that seed)"""
    return split(seed, 0).generator()


def within_group_index(multiplicity: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Expand groups into members.

    Returns (group_index, member_index) arrays of length sum(multiplicity).
    """
    multiplicity = np.asarray(multiplicity, dtype=np.int64)
    total = int(multiplicity.sum())
    group_index = np.repeat(np.arange(multiplicity.size), multiplicity)
    starts = np.cumsum(multiplicity) - multiplicity
    member_index = np.arange(total, dtype=np.int64) - np.repeat(starts, multiplicity)
    return group_index, member_index
