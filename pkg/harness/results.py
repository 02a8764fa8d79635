"""
Result persistence

Layout of one results directory:

    config.json                 ExperimentConfig (round-trips)
    replicas/replica_00000.csv  raw rows of one replica, written atomically
    raw.csv                     all replica rows, ordered by replica
    record.json                 ResultRecord (points, fits, verdict)
    verdict.csv                 one row per check
    missing_replicas.json       only for partial runs
    run_info.json               wall-clock, host, workers (not reproducible)

Everything except run_info.json is byte-identical for identical configs.
"""

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from core import __version__
from core.errors import ConfigError

FLOAT_FORMAT = "%.17g"
RECORD_SCHEMA = 1

CONFIG_FILE = "config.json"
RAW_FILE = "raw.csv"
RECORD_FILE = "record.json"
VERDICT_FILE = "verdict.csv"
MISSING_FILE = "missing_replicas.json"
RUN_INFO_FILE = "run_info.json"
REPLICA_DIR = "replicas"

VERDICT_COLUMNS = ["check", "value", "target", "tolerance", "status", "note"]


def clean_json(value: Any) -> Any:
    """Replace non-finite floats by None so the JSON is standard"""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): clean_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean_json(v) for v in value]
    if hasattr(value, "item") and callable(value.item):
        return clean_json(value.item())
    return value


def dumps(data: Any) -> str:
    return json.dumps(clean_json(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    """Write through a temporary file in the same directory, then rename"""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


@dataclass(frozen=True)
class VerdictRow:
    """
    One acceptance check

    status is "pass", "fail" or "report" (qualitative, no pass/fail claimed).
    """
    check: str
    value: float
    target: Optional[float]
    tolerance: Optional[float]
    status: str
    note: str = ""

    @classmethod
    def judged(cls, check: str, value: float, target: Optional[float], tolerance: Optional[float],
               passed: bool, note: str = "") -> 'VerdictRow':
        return cls(check, value, target, tolerance, "pass" if passed else "fail", note)

    @classmethod
    def report(cls, check: str, value: float, note: str = "") -> 'VerdictRow':
        return cls(check, value, None, None, "report", note)

    @property
    def passed(self) -> Optional[bool]:
        return None if self.status == "report" else self.status == "pass"


def verdict_frame(rows: Sequence[VerdictRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=VERDICT_COLUMNS)


def read_verdict(path: Union[str, Path]) -> List[VerdictRow]:
    frame = pd.read_csv(path, keep_default_na=False, na_values=[""],
                        dtype={"check": str, "status": str, "note": str})
    rows = []
    for rec in frame.to_dict("records"):
        rows.append(VerdictRow(
            rec["check"], float(rec["value"]),
            None if pd.isna(rec["target"]) else float(rec["target"]),
            None if pd.isna(rec["tolerance"]) else float(rec["tolerance"]),
            rec["status"], "" if pd.isna(rec["note"]) else rec["note"]))
    return rows


@dataclass
class ResultRecord:
    """Self-describing record of one experiment"""
    preset: str
    parameters: Dict[str, Any]
    points: List[Dict[str, Any]]
    fits: Dict[str, Dict[str, float]]
    seeds: Dict[str, Any]
    verdict: List[Dict[str, Any]]
    complete: bool = True
    software_version: str = __version__
    schema: int = RECORD_SCHEMA
    run_info: str = RUN_INFO_FILE
    columns: Dict[str, List[str]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ResultRecord':
        return cls(**data)


class ResultStore:
    """Reads and writes the files of one results directory"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @property
    def replica_dir(self) -> Path:
        return self.root / REPLICA_DIR

    def prepare(self) -> None:
        """
        Raises:
            ConfigError: the directory cannot be created or written
        """
        try:
            self.replica_dir.mkdir(parents=True, exist_ok=True)
            marker = self.root / ".write_check"
            marker.write_text("")
            marker.unlink()
        except OSError as e:
            raise ConfigError(f"output directory {self.root} is not writable: {e}")

    def replica_path(self, replica: int) -> Path:
        return self.replica_dir / f"replica_{replica:05d}.csv"

    def write_replica(self, replica: int, frame: pd.DataFrame) -> Path:
        path = self.replica_path(replica)
        atomic_write_text(path, frame_to_csv(frame))
        return path

    def read_replica(self, replica: int) -> pd.DataFrame:
        return pd.read_csv(self.replica_path(replica), dtype={"seed": str})

    def merge_replicas(self, replicas: Sequence[int], columns: Sequence[str]) -> pd.DataFrame:
        """Concatenate replica files in replica order (independent of completion order)"""
        frames = [self.read_replica(r) for r in sorted(replicas)]
        if not frames:
            return pd.DataFrame(columns=list(columns))
        return pd.concat(frames, ignore_index=True)[list(columns)]

    def write_raw(self, frame: pd.DataFrame) -> None:
        atomic_write_text(self.root / RAW_FILE, frame_to_csv(frame))

    def read_raw(self) -> pd.DataFrame:
        path = self.root / RAW_FILE
        if not path.exists():
            raise ConfigError(f"no {RAW_FILE} in {self.root}")
        return pd.read_csv(path, dtype={"seed": str})

    def write_json(self, name: str, data: Any) -> None:
        atomic_write_text(self.root / name, dumps(data))

    def read_json(self, name: str) -> Any:
        path = self.root / name
        if not path.exists():
            raise ConfigError(f"no {name} in {self.root}")
        return json.loads(path.read_text())

    def write_record(self, record: ResultRecord) -> None:
        atomic_write_text(self.root / RECORD_FILE, record.to_json())

    def write_verdict(self, rows: Sequence[VerdictRow]) -> None:
        atomic_write_text(self.root / VERDICT_FILE, frame_to_csv(verdict_frame(rows)))

    def write_missing(self, missing: Sequence[int], reason: str) -> Path:
        path = self.root / MISSING_FILE
        self.write_json(MISSING_FILE, {"missing": sorted(int(r) for r in missing), "reason": reason})
        return path

    def clear_missing(self) -> None:
        path = self.root / MISSING_FILE
        if path.exists():
            path.unlink()
