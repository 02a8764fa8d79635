"""
Spine sampling under the size-biased measure

Under the measure tilted by W_n the tree has a distinguished line of
descent: each spine particle reproduces with the brood law tilted by the
brood's sum of e^{-V}, and the next spine particle is picked within the
brood proportionally to e^{-V}. The spine therefore moves as the
associated walk; its brothers start ordinary subtrees.
"""

import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List

import numpy as np

from core.errors import DomainError
from core.rng import split
from reproduction.interfaces import Brood, ReproductionLaw, TiltedBatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpineRealization:
    """
    One spine of length n with its brothers

    Attributes:
        spine_positions: V(w_0) = 0, ..., V(w_n)
        spine_group_size: Size of the co-located group holding w_i (i = 1..n)
        chosen_index: Index of w_i inside that group
        brother_step: Generation i of each brother group (brothers of w_i)
        brother_positions: Absolute brother group positions
        brother_multiplicity: Brother group sizes
        brother_log_multiplicity: log of the brother group sizes
    """
    spine_positions: np.ndarray
    spine_group_size: np.ndarray
    chosen_index: np.ndarray
    brother_step: np.ndarray
    brother_positions: np.ndarray
    brother_multiplicity: np.ndarray
    brother_log_multiplicity: np.ndarray

    @property
    def n(self) -> int:
        return int(self.spine_positions.size - 1)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.spine_positions)

    def brothers(self, i: int) -> Brood:
        """Brothers of w_i (children of w_{i-1} other than w_i)"""
        sel = self.brother_step == i
        return Brood(self.brother_positions[sel], self.brother_multiplicity[sel],
                     self.brother_log_multiplicity[sel])

    def brood(self, i: int) -> Brood:
        """Full brood of w_{i-1}, spine group first"""
        bro = self.brothers(i)
        return Brood(np.concatenate([[self.spine_positions[i]], bro.positions]),
                     np.concatenate([[1.0], bro.multiplicities]),
                     np.concatenate([[0.0], bro.log_multiplicities]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "spine_positions": self.spine_positions.tolist(),
            "spine_group_size": self.spine_group_size.tolist(),
            "chosen_index": self.chosen_index.tolist(),
            "brothers": {
                "step": self.brother_step.tolist(),
                "positions": self.brother_positions.tolist(),
                "multiplicity": self.brother_multiplicity.tolist(),
                "log_multiplicity": self.brother_log_multiplicity.tolist(),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SpineRealization':
        bro = data["brothers"]
        return cls(
            np.asarray(data["spine_positions"], dtype=float),
            np.asarray(data["spine_group_size"], dtype=float),
            np.asarray(data["chosen_index"], dtype=np.int64),
            np.asarray(bro["step"], dtype=np.int64),
            np.asarray(bro["positions"], dtype=float),
            np.asarray(bro["multiplicity"], dtype=float),
            np.asarray(bro["log_multiplicity"], dtype=float),
        )

    @classmethod
    def from_path(cls, positions, brothers: List[List[float]]) -> 'SpineRealization':
        """
        Realization from explicit spine positions and unit-size brothers

        Args:
            positions: V(w_0), ..., V(w_n) with V(w_0) = 0
            brothers: brothers[i - 1] lists the positions of the brothers of w_i
        """
        positions = np.asarray(positions, dtype=float)
        n = positions.size - 1
        if n < 0 or positions[0] != 0.0:
            raise DomainError("a spine starts at the origin")
        if len(brothers) != n:
            raise DomainError("one brother list per spine step is required")
        steps = np.concatenate([np.full(len(b), i + 1, dtype=np.int64) for i, b in enumerate(brothers)]
                               + [np.empty(0, dtype=np.int64)])
        bro = np.concatenate([np.asarray(b, dtype=float) for b in brothers] + [np.empty(0)])
        return cls(positions, np.ones(n), np.zeros(n, dtype=np.int64), steps, bro,
                   np.ones(bro.size), np.zeros(bro.size))


@dataclass(frozen=True)
class SpineBatch:
    """
    Many spines at once

    Attributes:
        positions: Array (reps, n + 1) of spine positions
        group_size: Array (reps, n) of spine group sizes
        chosen_index: Array (reps, n)
        brother_rep: Spine owning each brother group
        brother_step: Generation of each brother group
        brother_positions: Absolute brother positions
        brother_multiplicity: Brother group sizes
        brother_log_multiplicity: log of the brother group sizes
    """
    positions: np.ndarray
    group_size: np.ndarray
    chosen_index: np.ndarray
    brother_rep: np.ndarray
    brother_step: np.ndarray
    brother_positions: np.ndarray
    brother_multiplicity: np.ndarray
    brother_log_multiplicity: np.ndarray

    @property
    def reps(self) -> int:
        return int(self.positions.shape[0])

    @property
    def n(self) -> int:
        return int(self.positions.shape[1] - 1)

    def realization(self, rep: int) -> SpineRealization:
        sel = self.brother_rep == rep
        return SpineRealization(self.positions[rep].copy(), self.group_size[rep].copy(),
                                self.chosen_index[rep].copy(), self.brother_step[sel],
                                self.brother_positions[sel], self.brother_multiplicity[sel],
                                self.brother_log_multiplicity[sel])


def tilted_brood(law: ReproductionLaw, rng: np.random.Generator) -> TiltedBatch:
    """One size-biased brood with its spine child (displacements relative to the parent)"""
    return law.tilted_broods(rng.random((1, law.uniforms_per_tilted_brood)))


def sample_spines(law: ReproductionLaw, n: int, reps: int, rng: np.random.Generator) -> SpineBatch:
    """
    Sample reps independent spines of length n

    Uniforms are drawn as one (reps * n, k) block, spine-major, so results
    depend only on the generator state.
    """
    if n < 1:
        raise DomainError("spine length n must be >= 1")
    if reps < 1:
        raise DomainError("reps must be >= 1")
    tilted = law.tilted_broods(rng.random((reps * n, law.uniforms_per_tilted_brood)))
    steps = tilted.spine_step.reshape(reps, n)
    positions = np.zeros((reps, n + 1))
    positions[:, 1:] = np.cumsum(steps, axis=1)

    owner = tilted.brother_owner
    rep, step = owner // n, owner % n + 1
    base = positions[rep, step - 1]
    return SpineBatch(
        positions=positions,
        group_size=tilted.spine_group_size.reshape(reps, n),
        chosen_index=tilted.chosen_index.reshape(reps, n),
        brother_rep=rep,
        brother_step=step,
        brother_positions=base + tilted.brother_displacement,
        brother_multiplicity=tilted.brother_multiplicity,
        brother_log_multiplicity=tilted.brother_log_multiplicity,
    )


def sample_spine(law: ReproductionLaw, n: int, seed: int) -> SpineRealization:
    """Single auditable spine for replica 0 of seed"""
    realization = sample_spines(law, n, 1, split(seed, 0).generator()).realization(0)
    logger.debug(f"Spine of length {n} for seed {seed}: terminal {realization.spine_positions[-1]:.4g}")
    return realization
