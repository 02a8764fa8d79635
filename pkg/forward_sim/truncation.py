"""
Population control for forward trees

Mean offspring is infinite under a stable tail, so every forward run is
truncated: children above the ceiling C(n) are dropped at birth, and when
the survivors exceed max_population only the lowest-positioned ones are
kept (ties broken by label, so the rule is a total order).
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from core.errors import PolicyError


@dataclass(frozen=True)
class TruncationPolicy:
    """
    Attributes:
        ceiling_scale: K_c in C(n) = K_c * (1 + log(1 + n)); inf disables the ceiling
        max_population: Hard cap on the population
        chunk_size: Parents processed per streaming chunk
        constant_ceiling: When set, C(n) equals this constant for every n
    """
    ceiling_scale: float = 20.0
    max_population: int = 200_000
    chunk_size: int = 65536
    constant_ceiling: Optional[float] = None

    def __post_init__(self):
        if self.max_population < 1:
            raise PolicyError("max_population must be >= 1")
        if self.chunk_size < 1:
            raise PolicyError("chunk_size must be >= 1")
        if self.constant_ceiling is None and not self.ceiling_scale > 0:
            raise PolicyError("ceiling_scale must be > 0")
        if self.constant_ceiling is not None and math.isnan(self.constant_ceiling):
            raise PolicyError("constant_ceiling must be a number")

    def ceiling(self, n: int) -> float:
        """C(n), nondecreasing in n"""
        if self.constant_ceiling is not None:
            return float(self.constant_ceiling)
        return self.ceiling_scale * (1.0 + math.log1p(n))

    def check(self, n: int, current_min: float) -> None:
        """Reject a ceiling that cannot keep any particle near the current minimum"""
        c = self.ceiling(n)
        if not c > current_min:
            raise PolicyError(f"ceiling C({n}) = {c} must exceed the current minimum {current_min}")

    @classmethod
    def from_config(cls, section: Mapping[str, Any]) -> 'TruncationPolicy':
        return cls(
            ceiling_scale=float(section.get("ceiling_scale", 20.0)),
            max_population=int(section.get("max_population", 200_000)),
            chunk_size=int(section.get("chunk_size", 65536)),
            constant_ceiling=(None if section.get("constant_ceiling") is None
                              else float(section["constant_ceiling"])),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"ceiling_scale": self.ceiling_scale, "max_population": self.max_population,
                "chunk_size": self.chunk_size, "constant_ceiling": self.constant_ceiling}


def cap_lowest(positions: np.ndarray, labels: np.ndarray, multiplicity: np.ndarray,
               max_population: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Keep the lowest max_population members

    Args:
        multiplicity: Float group sizes (may be inf)

    Returns:
        (rows, kept) where rows index the surviving groups in (position, label)
        order and kept is their new multiplicity; a boundary group keeps its
        first members only
    """
    total = float(np.sum(multiplicity))
    if total <= max_population:
        return np.arange(positions.size), multiplicity
    order = np.lexsort((labels, positions))
    cum = np.cumsum(multiplicity[order])
    whole = int(np.searchsorted(cum, max_population, side="right"))
    before = float(cum[whole - 1]) if whole else 0.0
    room = max_population - before
    if room > 0 and whole < order.size:
        rows = order[:whole + 1]
        kept = multiplicity[rows].copy()
        kept[-1] = room
    else:
        rows = order[:whole]
        kept = multiplicity[rows].copy()
    return rows, kept
