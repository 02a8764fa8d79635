"""
Tests for result persistence
"""

import json
import math
from pathlib import Path

import pandas as pd
import pytest

from core.errors import ConfigError
from .results import (MISSING_FILE, ResultRecord, ResultStore, VerdictRow, atomic_write_text,
                      clean_json, dumps, read_verdict)


def test_verdict_csv_header_is_stable(tmp_path):
    store = ResultStore(tmp_path)
    store.write_verdict([VerdictRow.judged("slope", -0.66, -2 / 3, 0.07, True)])
    header = (tmp_path / "verdict.csv").read_text().splitlines()[0]
    assert header == "check,value,target,tolerance,status,note"


def test_verdict_rows_survive_the_csv(tmp_path):
    rows = [VerdictRow.judged("slope", -0.66, -2 / 3, 0.07, True, "log-log"),
            VerdictRow.judged("overlap", 0.01, 0.0, None, False),
            VerdictRow.report("envelope", -1.3, "qualitative")]
    ResultStore(tmp_path).write_verdict(rows)
    assert read_verdict(tmp_path / "verdict.csv") == rows
    assert [r.passed for r in rows] == [True, False, None]


def test_replica_files_merge_in_replica_order(tmp_path):
    store = ResultStore(tmp_path)
    store.prepare()
    for replica in (2, 0, 1):
        store.write_replica(replica, pd.DataFrame({"replica": [replica], "seed": [f"7:{replica}"],
                                                   "x": [replica / 3.0]}))
    merged = store.merge_replicas([1, 2, 0], ["replica", "seed", "x"])
    assert merged["replica"].tolist() == [0, 1, 2]
    assert merged["seed"].tolist() == ["7:0", "7:1", "7:2"]
    assert merged["x"].tolist() == [0.0, 1 / 3.0, 2 / 3.0]
    assert sorted(p.name for p in store.replica_dir.iterdir()) == [
        "replica_00000.csv", "replica_00001.csv", "replica_00002.csv"]


def test_empty_merge_keeps_columns(tmp_path):
    assert list(ResultStore(tmp_path).merge_replicas([], ["replica", "seed"]).columns) == ["replica", "seed"]


def test_atomic_write_leaves_no_partial_file(tmp_path, mocker):
    target = tmp_path / "raw.csv"
    atomic_write_text(target, "old\n")
    mocker.patch("harness.results.os.replace", side_effect=OSError("disk full"))
    with pytest.raises(OSError):
        atomic_write_text(target, "new\n")
    assert target.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["raw.csv"]


def test_unwritable_output_directory(tmp_path, mocker):
    mocker.patch.object(Path, "mkdir", side_effect=PermissionError("read-only"))
    with pytest.raises(ConfigError):
        ResultStore(tmp_path / "out").prepare()


def test_json_is_standard_and_sorted():
    data = {"b": float("nan"), "a": [1.0, float("inf")], "c": {"z": 1, "y": 2}}
    assert clean_json(data) == {"b": None, "a": [1.0, None], "c": {"z": 1, "y": 2}}
    text = dumps(data)
    assert json.loads(text) == {"a": [1.0, None], "b": None, "c": {"y": 2, "z": 1}}
    assert text.index('"a"') < text.index('"b"')


def test_record_round_trip(tmp_path):
    record = ResultRecord("wn-decay", {"replicas": 2}, [{"n": 4, "value": 0.5}],
                          {"log_n": {"slope": -0.6, "stderr": 0.01, "intercept": 0.0}},
                          {"master_seed": 1, "replicas": [0, 1]}, [])
    store = ResultStore(tmp_path)
    store.write_record(record)
    assert ResultRecord.from_dict(store.read_json("record.json")) == record


def test_missing_manifest(tmp_path):
    store = ResultStore(tmp_path)
    path = store.write_missing([5, 2], "replica failures")
    assert json.loads(path.read_text()) == {"missing": [2, 5], "reason": "replica failures"}
    store.clear_missing()
    assert not (tmp_path / MISSING_FILE).exists()
    with pytest.raises(ConfigError):
        store.read_raw()
    assert math.isnan(VerdictRow.report("x", float("nan")).value)
