"""
Verdict stage

Recomputes points, fits and verdict rows from a results directory's
config.json and raw.csv. Running it twice, or after the experiment that
produced the directory, gives identical record.json and verdict.csv.
"""

import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Sequence, Union

from core.logger import COLORAMA_AVAILABLE
from .experiment_config import ExperimentConfig
from .presets import create_preset
from .results import (CONFIG_FILE, MISSING_FILE, VERDICT_COLUMNS, ResultRecord, ResultStore,
                      VerdictRow)

if COLORAMA_AVAILABLE:
    from colorama import Fore, Style

logger = logging.getLogger(__name__)

SPLIT_RULE = "SeedSequence(master_seed, spawn_key=(replica,))"


@dataclass
class ExperimentOutcome:
    root: Path
    record: ResultRecord
    verdict: List[VerdictRow]

    @property
    def passed(self) -> bool:
        """True when no check failed (reports do not count)"""
        return all(row.status != "fail" for row in self.verdict)


def evaluate_directory(root: Union[str, Path], write: bool = True) -> ExperimentOutcome:
    """
    Summarize and judge the raw table stored in a results directory

    Args:
        root: Results directory holding config.json and raw.csv
        write: Write record.json and verdict.csv
    """
    store = ResultStore(root)
    config = ExperimentConfig.load(store.root / CONFIG_FILE)
    preset = create_preset(config)
    raw = store.read_raw()
    summary, verdict = preset.evaluate(raw)
    replicas = sorted(int(r) for r in raw["replica"].unique())
    record = ResultRecord(
        preset=config.preset,
        parameters=config.to_dict(),
        points=summary.points,
        fits=summary.fits,
        seeds={"master_seed": config.master_seed, "replicas": replicas, "split": SPLIT_RULE},
        verdict=[asdict(row) for row in verdict],
        complete=not (store.root / MISSING_FILE).exists(),
        columns={"raw": preset.raw_columns, "verdict": list(VERDICT_COLUMNS)},
    )
    if write:
        store.write_record(record)
        store.write_verdict(verdict)
    failed = sum(1 for row in verdict if row.status == "fail")
    logger.info(f"Verdict for {config.preset}: {len(verdict) - failed} of {len(verdict)} checks "
                f"without failure")
    return ExperimentOutcome(store.root, record, verdict)


def _colored(status: str) -> str:
    if not COLORAMA_AVAILABLE:
        return status.upper()
    color = {"pass": Fore.GREEN, "fail": Fore.RED}.get(status, Fore.YELLOW)
    return f"{color}{status.upper()}{Style.RESET_ALL}"


def _fmt(value) -> str:
    return "-" if value is None else f"{value:.4g}"


def render_verdict_table(rows: Sequence[VerdictRow], color: bool = True) -> str:
    """One line per check: status, check, value, target, tolerance, note"""
    width = max([len(r.check) for r in rows] + [5])
    lines = [f"{'STATUS':<7} {'CHECK':<{width}} {'VALUE':>11} {'TARGET':>11} {'TOL':>9}  NOTE"]
    for r in rows:
        status = _colored(r.status) if color else r.status.upper()
        pad = " " * max(0, 7 - len(r.status))
        lines.append(f"{status}{pad} {r.check:<{width}} {_fmt(r.value):>11} {_fmt(r.target):>11} "
                     f"{_fmt(r.tolerance):>9}  {r.note}")
    return "\n".join(lines)
