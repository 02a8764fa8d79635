"""
Preset interface

A preset turns an ExperimentConfig into raw per-replica rows, then (as pure
functions of the stored raw table) into points, fits and verdict rows. The
verdict stage reruns only `summarize` and `judge` on raw.csv.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.errors import ConfigError, CostGuardError
from core.rng import ReplicaStream, split
from forward_sim.truncation import TruncationPolicy
from reproduction.factory import LawFactory
from reproduction.interfaces import ReproductionLaw
from .estimators import SlopeFit, wilson_interval, z_value
from .experiment_config import ExperimentConfig
from .results import VerdictRow


@dataclass
class Summary:
    """Points (one dict per estimated quantity) and named slope fits"""
    points: List[Dict[str, Any]] = field(default_factory=list)
    fits: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def add_fit(self, name: str, fit: Optional[SlopeFit]) -> None:
        if fit is not None:
            self.fits[name] = dict(fit._asdict())


class Preset(ABC):
    """
    Base class for experiment presets

    Subclasses set `id`, `description` and `columns` (the raw CSV columns
    after `replica` and `seed`) and implement the four stages. `aliases`
    are alternative ids accepted on the command line.
    """

    id: ClassVar[str] = ""
    description: ClassVar[str] = ""
    columns: ClassVar[List[str]] = []
    qualitative: ClassVar[bool] = False
    aliases: ClassVar[Tuple[str, ...]] = ()

    def __init__(self, config: ExperimentConfig, factory: Optional[LawFactory] = None):
        self.config = config
        self.params = config.params
        self.law: ReproductionLaw = (factory or LawFactory()).create(config.law)
        self.logger = logging.getLogger(type(self).__name__)
        self.validate()

    @property
    def raw_columns(self) -> List[str]:
        return ["replica", "seed"] + list(self.columns)

    def param(self, name: str, default: Any = None) -> Any:
        if name in self.params:
            return self.params[name]
        if default is None:
            raise ConfigError(f"preset {self.id} needs parameter '{name}'")
        return default

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy.from_config(self.config.truncation)

    @property
    def alpha(self) -> float:
        return self.law.alpha

    def require_stable_tail(self) -> None:
        if not self.law.satisfies_stable_tail:
            raise ConfigError(f"preset {self.id} needs a law with a stable tail "
                              f"(got {self.law.name})")

    def validate(self) -> None:
        """Preset-specific parameter checks (ConfigError / DomainError)"""

    @abstractmethod
    def estimate_cost(self) -> float:
        """Closed-form expected particle-steps for the whole experiment"""

    @abstractmethod
    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        """Raw rows of one replica, without the replica and seed columns"""

    @abstractmethod
    def summarize(self, raw: pd.DataFrame) -> Summary:
        """Points and fits from the raw table (pure)"""

    @abstractmethod
    def judge(self, summary: Summary) -> List[VerdictRow]:
        """Verdict rows from a summary (pure)"""

    def check_budget(self) -> float:
        cost = float(self.estimate_cost())
        if cost > float(self.config.budget):
            raise CostGuardError(
                f"preset {self.id} needs about {cost:.3g} particle-steps, "
                f"budget is {float(self.config.budget):.3g}", estimate=cost,
                budget=float(self.config.budget))
        self.logger.info(f"Estimated cost {cost:.3g} particle-steps (budget {float(self.config.budget):.3g})")
        return cost

    def replica_frame(self, replica: int) -> pd.DataFrame:
        stream = split(self.config.master_seed, replica)
        rows = []
        for row in self.run_replica(stream):
            full = {"replica": replica, "seed": stream.seed_label}
            full.update(row)
            rows.append(full)
        return pd.DataFrame(rows, columns=self.raw_columns)

    def evaluate(self, raw: pd.DataFrame):
        summary = self.summarize(raw)
        return summary, self.judge(summary)


def pooled_moments(raw: pd.DataFrame, keys: Sequence[str], confidence: float = 0.95) -> pd.DataFrame:
    """
    Pool per-replica (sum, sum_sq, count) columns into means with normal CIs

    Returns:
        One row per key with mean, stderr, low, high and count
    """
    grouped = raw.groupby(list(keys), sort=True)[["sum", "sum_sq", "count"]].sum().reset_index()
    count = grouped["count"].to_numpy(dtype=float)
    mean = grouped["sum"].to_numpy(dtype=float) / count
    var = np.maximum(grouped["sum_sq"].to_numpy(dtype=float) / count - mean ** 2, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        stderr = np.where(count > 1, np.sqrt(var / np.maximum(count - 1, 1)), np.inf)
    half = z_value(confidence) * stderr
    grouped["mean"] = mean
    grouped["stderr"] = stderr
    grouped["low"] = mean - half
    grouped["high"] = mean + half
    return grouped.drop(columns=["sum", "sum_sq"])


def moment_row(values: np.ndarray) -> Dict[str, float]:
    values = np.asarray(values, dtype=float)
    return {"sum": float(values.sum()), "sum_sq": float(np.square(values).sum()),
            "count": int(values.size)}


def proportion_point(hits: int, trials: int, confidence: float = 0.95) -> Dict[str, float]:
    low, high = wilson_interval(int(hits), int(trials), confidence)
    p = hits / trials
    return {"hits": int(hits), "trials": int(trials), "estimate": p,
            "stderr": math.sqrt(p * (1.0 - p) / trials), "low": low, "high": high}


def slope_verdict(check: str, fits: Dict[str, Dict[str, float]], key: str, target: float,
                  tolerance: float, note: str = "") -> VerdictRow:
    if key not in fits:
        return VerdictRow.judged(check, float("nan"), target, tolerance, False,
                                 "fewer than 3 usable points")
    slope = fits[key]["slope"]
    return VerdictRow.judged(check, slope, target, tolerance, abs(slope - target) <= tolerance, note)
