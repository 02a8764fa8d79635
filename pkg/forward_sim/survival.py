"""
Conditioning on survival

Runs are conditioned on non-extinction by rejection: whole runs are
repeated with fresh streams until enough of them reach n_max alive.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

from core.errors import ConfigError, SurvivalError
from core.rng import ReplicaStream, split
from reproduction.interfaces import ReproductionLaw
from .simulator import ForwardRun, ForwardSimulator, PathTracker
from .truncation import TruncationPolicy

logger = logging.getLogger(__name__)


@dataclass
class SurvivalResult:
    runs: List[ForwardRun]
    attempts: int

    @property
    def survival_rate(self) -> float:
        return len(self.runs) / self.attempts if self.attempts else float("nan")

    @property
    def stderr(self) -> float:
        p = self.survival_rate
        return math.sqrt(p * (1.0 - p) / self.attempts) if self.attempts else float("nan")


def survival_runs(law: ReproductionLaw, n_max: int, policy: Optional[TruncationPolicy] = None,
                  beta: float = 1.0, master_seed: int = 0, want: int = 1,
                  max_attempts: int = 10_000, min_rate: float = 1e-3) -> SurvivalResult:
    """
    Collect want runs that survive to generation n_max

    Attempt i uses split(master_seed, i).

    Raises:
        ConfigError: want < 1
        SurvivalError: want survivors were not found within max_attempts
    """
    if want < 1:
        raise ConfigError("survival_runs needs want >= 1")
    sim = ForwardSimulator(law, policy, beta)
    runs: List[ForwardRun] = []
    attempts = 0
    while len(runs) < want and attempts < max_attempts:
        run = sim.run(split(master_seed, attempts), n_max)
        attempts += 1
        if run.survived:
            runs.append(run)

    result = SurvivalResult(runs, attempts)
    if len(runs) < want:
        rate = result.survival_rate
        reason = (f"survival rate {rate:.3g} is below {min_rate:g}" if rate < min_rate
                  else f"only {len(runs)} of {want} runs survived")
        raise SurvivalError(f"gave up after {attempts} attempts: {reason}", attempts, len(runs))
    logger.info(f"{want} surviving runs to n={n_max} in {attempts} attempts "
                f"(rate {result.survival_rate:.4f})")
    return result


def first_surviving(sim: ForwardSimulator, stream: ReplicaStream, n_max: int,
                    max_attempts: int = 10_000,
                    tracker_factory: Optional[Callable[[], PathTracker]] = None) -> ForwardRun:
    """
    First run of a replica that survives to n_max

    Attempts use stream.attempt(0), stream.attempt(1), ... so the result
    depends only on (master_seed, replica_index).
    """
    for i in range(max_attempts):
        tracker: Optional[PathTracker] = tracker_factory() if tracker_factory else None
        run = sim.run(stream.attempt(i), n_max, tracker)
        if run.survived:
            return run
    raise SurvivalError(f"replica {stream.seed_label} found no survivor in {max_attempts} attempts",
                        max_attempts, 0)
