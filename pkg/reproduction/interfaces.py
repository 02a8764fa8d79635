"""
Reproduction Law Interfaces

Abstract base for reproduction point processes and the record types they
produce. Children born at the same location form one group with a
(possibly astronomically large) multiplicity; every consumer works with
groups and only expands them when it has to.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

MAX_EXPAND = 1_000_000


@dataclass(frozen=True)
class Brood:
    """
    Children of one parent

    Attributes:
        positions: Absolute position of each co-located group
        multiplicities: Group sizes as floats (inf when beyond float range)
        log_multiplicities: log of the group sizes, always finite
    """
    positions: np.ndarray
    multiplicities: np.ndarray
    log_multiplicities: np.ndarray

    @property
    def size(self) -> float:
        return float(np.sum(self.multiplicities))

    @property
    def is_empty(self) -> bool:
        return self.positions.size == 0

    def weight(self, parent_position: float = 0.0) -> float:
        """Sum of e^{-(V - parent)} over the brood"""
        return float(np.sum(np.exp(self.log_multiplicities - (self.positions - parent_position))))

    def expand(self) -> np.ndarray:
        """Flat list of child positions; refuses broods too large to list"""
        if self.size > MAX_EXPAND:
            raise OverflowError(f"brood of size {self.size:.3g} is too large to expand")
        return np.repeat(self.positions, self.multiplicities.astype(np.int64))


@dataclass(frozen=True)
class BroodBatch:
    """
    Broods of many parents at once, one row per child group

    Attributes:
        parent_index: Index of the parent in the input arrays
        rank: Rank of the group within its parent's brood
        displacement: Group position relative to the parent
        multiplicity: Group size (float)
        log_multiplicity: log of the group size
    """
    parent_index: np.ndarray
    rank: np.ndarray
    displacement: np.ndarray
    multiplicity: np.ndarray
    log_multiplicity: np.ndarray

    @property
    def groups(self) -> int:
        return int(self.parent_index.size)

    def weights(self) -> np.ndarray:
        """Per-group contribution to the brood's sum of e^{-displacement}"""
        return np.exp(self.log_multiplicity - self.displacement)

    def brood(self, parent: int, parent_position: float = 0.0) -> Brood:
        sel = self.parent_index == parent
        return Brood(parent_position + self.displacement[sel],
                     self.multiplicity[sel], self.log_multiplicity[sel])


@dataclass(frozen=True)
class TiltedBatch:
    """
    Size-biased broods along spines, one spine step per row

    Attributes:
        spine_step: Displacement of the chosen spine child
        spine_group_size: Size of the co-located group the spine child belongs to
        chosen_index: Index of the spine child within its group
        brother_owner: Row owning each brother group
        brother_displacement: Brother group displacements
        brother_multiplicity: Brother group sizes
        brother_log_multiplicity: log of the brother group sizes
    """
    spine_step: np.ndarray
    spine_group_size: np.ndarray
    chosen_index: np.ndarray
    brother_owner: np.ndarray
    brother_displacement: np.ndarray
    brother_multiplicity: np.ndarray
    brother_log_multiplicity: np.ndarray


class ReproductionLaw(ABC):
    """Interface for reproduction laws"""

    name: str = "law"

    @property
    @abstractmethod
    def uniforms_per_brood(self) -> int:
        """Uniforms consumed by draw_broods per parent"""
        pass

    @property
    @abstractmethod
    def uniforms_per_tilted_brood(self) -> int:
        pass

    @property
    def satisfies_stable_tail(self) -> bool:
        """Whether the weighted intensity has a Pareto right tail"""
        return False

    @property
    def alpha(self) -> float:
        """Tail index of the associated walk, nan when not heavy-tailed"""
        return float("nan")

    @abstractmethod
    def draw_broods(self, uniforms: np.ndarray) -> BroodBatch:
        """
        Broods for a batch of parents

        Args:
            uniforms: Array (parents, uniforms_per_brood) of U(0,1) draws

        Returns:
            BroodBatch with displacements relative to each parent
        """
        pass

    @abstractmethod
    def tilted_broods(self, uniforms: np.ndarray) -> TiltedBatch:
        """Size-biased broods (tilted by the brood's sum of e^{-V}) with a chosen spine child"""
        pass

    @abstractmethod
    def walk_increments(self, size, rng: np.random.Generator) -> np.ndarray:
        """Increments of the associated many-to-one walk"""
        pass

    @abstractmethod
    def step_cdf(self, s: np.ndarray) -> np.ndarray:
        """CDF of the associated walk increment"""
        pass

    @abstractmethod
    def intensity_targets(self) -> List[Tuple[str, float, float, float]]:
        """
        Exact weighted-intensity values for interval test functions

        Returns:
            (name, low, high, exact) with exact = E[sum 1{low <= V <= high} e^{-V}]
        """
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    def sample_brood(self, parent_position: float, rng: np.random.Generator) -> Brood:
        """Children of a single parent"""
        batch = self.draw_broods(rng.random((1, self.uniforms_per_brood)))
        return batch.brood(0, parent_position)

    def sample_broods(self, count: int, rng: np.random.Generator) -> BroodBatch:
        """Broods of count parents at the origin"""
        return self.draw_broods(rng.random((count, self.uniforms_per_brood)))
