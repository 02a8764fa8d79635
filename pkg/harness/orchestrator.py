"""
Replica orchestration

The coordinator hands replica indices to a process pool (or runs them
in-process for one worker). Each replica derives its randomness from
split(master_seed, replica) and writes its own file atomically; the merge
reads the files back in replica order, so results do not depend on the
worker count or the completion order.
"""

import logging
import platform
import threading
import time
from concurrent.futures import FIRST_COMPLETED, Future, ProcessPoolExecutor, wait
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from tqdm import tqdm

from core import __version__
from core.errors import ApplicationError, ConfigError
from core.logger import ContextFilter
from .experiment_config import ExperimentConfig
from .preset_base import Preset
from .presets import create_preset
from .results import CONFIG_FILE, RUN_INFO_FILE, ResultStore
from .verdict import ExperimentOutcome, evaluate_directory

logger = logging.getLogger(__name__)

_PRESET_CACHE: Dict[str, Preset] = {}


def _cached_preset(config_data: Mapping[str, Any]) -> Preset:
    config = ExperimentConfig.from_dict(config_data)
    key = config.to_json()
    if key not in _PRESET_CACHE:
        _PRESET_CACHE.clear()
        _PRESET_CACHE[key] = create_preset(config)
    return _PRESET_CACHE[key]


def run_replica_task(config_data: Mapping[str, Any], replica: int, root: str) -> int:
    """Run one replica and write its file; executed in worker processes"""
    ContextFilter.set_context_value("replica", replica)
    try:
        preset = _cached_preset(config_data)
        frame = preset.replica_frame(replica)
        ResultStore(root).write_replica(replica, frame)
        logger.debug(f"Replica {replica}: {len(frame)} rows")
        return replica
    finally:
        ContextFilter.remove_context_value("replica")


@dataclass
class OrchestrationResult:
    completed: List[int] = field(default_factory=list)
    failures: Dict[int, str] = field(default_factory=dict)
    missing: List[int] = field(default_factory=list)
    interrupted: bool = False

    @property
    def complete(self) -> bool:
        return not self.missing


class Orchestrator:
    """
    Runs the replicas of one experiment

    Features:
    - Deterministic per-replica streams, worker-count independent merge
    - Bounded submission window so a shutdown request stops new replicas
    - Failed or unscheduled replicas are reported as missing
    """

    def __init__(self, workers: int = 1, progress: bool = True,
                 shutdown_event: Optional[threading.Event] = None):
        if workers < 1:
            raise ConfigError("worker count must be >= 1")
        self.workers = int(workers)
        self.progress = progress
        self.shutdown_event = shutdown_event or threading.Event()
        self.logger = logging.getLogger("Orchestrator")

    def run(self, config: ExperimentConfig, store: ResultStore) -> OrchestrationResult:
        replicas = list(range(config.replicas))
        result = OrchestrationResult()
        with tqdm(total=len(replicas), desc=config.preset, unit="replica",
                  disable=not self.progress) as bar:
            if self.workers == 1:
                self._run_serial(config, store, replicas, result, bar)
            else:
                self._run_pool(config, store, replicas, result, bar)
        done = set(result.completed)
        result.completed.sort()
        result.missing = [r for r in replicas if r not in done]
        if result.missing:
            self.logger.warning(f"{len(result.missing)} of {len(replicas)} replicas missing")
        return result

    def _run_serial(self, config, store, replicas, result, bar) -> None:
        data = config.to_dict()
        for replica in replicas:
            if self.shutdown_event.is_set():
                result.interrupted = True
                break
            try:
                result.completed.append(run_replica_task(data, replica, str(store.root)))
            except Exception as e:
                self.logger.error(f"Replica {replica} failed: {e}")
                result.failures[replica] = str(e)
            bar.update(1)

    def _run_pool(self, config, store, replicas, result, bar) -> None:
        data = config.to_dict()
        queue = list(reversed(replicas))
        window = 2 * self.workers
        pending: Dict[Future, int] = {}
        try:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                while queue or pending:
                    while queue and len(pending) < window and not self.shutdown_event.is_set():
                        replica = queue.pop()
                        pending[pool.submit(run_replica_task, data, replica, str(store.root))] = replica
                    if not pending:
                        result.interrupted = True
                        break
                    finished, _ = wait(list(pending), return_when=FIRST_COMPLETED)
                    for future in finished:
                        replica = pending.pop(future)
                        try:
                            result.completed.append(future.result())
                        except BrokenProcessPool:
                            raise
                        except Exception as e:
                            self.logger.error(f"Replica {replica} failed: {e}")
                            result.failures[replica] = str(e)
                        bar.update(1)
        except BrokenProcessPool as e:
            self.logger.error(f"Worker pool broke down: {e}")
            for replica in pending.values():
                result.failures[replica] = "worker process terminated"
            result.interrupted = True


def run_experiment(config: ExperimentConfig, out_dir: Union[str, Path], workers: int = 1,
                   progress: bool = True,
                   shutdown_event: Optional[threading.Event] = None) -> ExperimentOutcome:
    """
    Run a preset end to end: cost guard, replicas, merge, verdict

    Returns:
        ExperimentOutcome with the record and verdict rows

    Raises:
        ConfigError: unknown preset, bad parameters or unwritable output
        CostGuardError: estimated particle-steps above the budget
        ApplicationError: some replicas are missing (manifest written)
    """
    preset = create_preset(config)
    preset.check_budget()
    store = ResultStore(out_dir)
    store.prepare()
    store.clear_missing()
    config.save(store.root / CONFIG_FILE)
    ContextFilter.set_context_value("preset", config.preset)
    logger.info(f"Running {config.preset}: {config.replicas} replicas on {workers} worker(s) "
                f"into {store.root}")

    started = time.time()
    orchestrator = Orchestrator(workers, progress, shutdown_event)
    try:
        result = orchestrator.run(config, store)
        store.write_raw(store.merge_replicas(result.completed, preset.raw_columns))
        store.write_json(RUN_INFO_FILE, {
            "wall_clock_seconds": round(time.time() - started, 3),
            "host": platform.node(),
            "python": platform.python_version(),
            "workers": workers,
            "software_version": __version__,
            "completed": len(result.completed),
            "interrupted": result.interrupted,
        })

        if result.missing:
            reason = "interrupted" if result.interrupted and not result.failures else "replica failures"
            path = store.write_missing(result.missing, reason)
            raise ApplicationError(f"{len(result.missing)} replicas missing, manifest at {path}",
                                   missing=result.missing, manifest_path=str(path))

        return evaluate_directory(store.root)
    finally:
        ContextFilter.remove_context_value("preset")
