"""
Walk paths of the associated random walk
"""

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from core.errors import DomainError
from .step_law import StepLaw, sample_steps

# rows * steps per block when walks are generated in chunks
BLOCK_CELLS = 1 << 22


@dataclass(frozen=True)
class WalkPath:
    """
    A single path S_0 = 0, S_1, ..., S_n

    Attributes:
        steps: Increments S_i - S_{i-1}
    """
    steps: np.ndarray

    @classmethod
    def from_increments(cls, steps, law: Optional[StepLaw] = None) -> 'WalkPath':
        """Build a path from given increments, checking the support when a law is given"""
        steps = np.asarray(steps, dtype=float).reshape(-1)
        if law is not None and steps.size:
            outside = (steps < -law.d) | ((steps > 0.0) & (steps < law.x_m))
            if outside.any():
                raise DomainError(f"increments outside the step-law support: {steps[outside][:3]}")
        steps.setflags(write=False)
        return cls(steps)

    @property
    def n(self) -> int:
        return int(self.steps.size)

    @property
    def positions(self) -> np.ndarray:
        """Partial sums S_0..S_n"""
        return np.concatenate(([0.0], np.cumsum(self.steps)))

    @property
    def running_min(self) -> np.ndarray:
        """min_{0<=j<=i} S_j for i = 0..n"""
        return np.minimum.accumulate(self.positions)

    @property
    def minimum(self) -> float:
        return float(self.running_min[-1])

    @property
    def terminal(self) -> float:
        return float(self.positions[-1])


def walk_path(law: StepLaw, n: int, rng: np.random.Generator) -> WalkPath:
    """Sample a path of length n"""
    if n < 0:
        raise DomainError("n must be >= 0")
    return WalkPath.from_increments(sample_steps(law, n, rng))


def walk_blocks(law: StepLaw, n: int, reps: int, rng: np.random.Generator,
                block_cells: int = BLOCK_CELLS) -> Iterator[np.ndarray]:
    """
    Yield blocks of walk positions of shape (rows, n + 1), column 0 being S_0 = 0.

    Blocks are drawn in a fixed order so the concatenation is a function of
    (rng state, n, reps) only.
    """
    if n < 0 or reps < 1:
        raise DomainError("need n >= 0 and reps >= 1")
    rows = max(1, block_cells // max(n, 1))
    done = 0
    while done < reps:
        take = min(rows, reps - done)
        positions = np.zeros((take, n + 1))
        if n:
            np.cumsum(sample_steps(law, (take, n), rng), axis=1, out=positions[:, 1:])
        yield positions
        done += take
