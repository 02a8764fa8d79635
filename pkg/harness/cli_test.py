"""
Tests for the command-line front end
"""

import json

import pandas as pd
import pytest

from .cli import build_parser, main
from .results import read_verdict

FAST = ["--no-progress", "--log-level", "WARNING"]


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(
        "truncation:\n  max_population: 2000\n"
        "presets:\n"
        "  check-conditions:\n    broods_per_replica: 300\n"
        "  spine-marginal:\n    n: 8\n    steps_per_replica: 400\n")
    return str(path)


def test_parser_shares_common_options():
    args = build_parser().parse_args(["experiment", "wn-decay", "--seed", "9", "--workers", "2"])
    assert (args.command, args.preset, args.seed, args.workers) == ("experiment", "wn-decay", 9, 2)
    with pytest.raises(SystemExit):
        build_parser().parse_args(["walk"])


def test_presets_listing(output_root, capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "ballot-scaling" in out
    assert "lower-envelope" in out and "(qualitative)" in out
    assert "[also: lemma21]" in out


def test_experiment_then_verdict(output_root, tiny_config, tmp_path, capsys):
    out = tmp_path / "exp"
    code = main(["experiment", "check-conditions", "--config", tiny_config, "--replicas", "3",
                 "--seed", "4", "--out", str(out)] + FAST)
    assert code == 0
    assert "boundary_weight" in capsys.readouterr().out
    first = (out / "verdict.csv").read_bytes()
    assert main(["verdict", str(out)] + FAST) == 0
    assert (out / "verdict.csv").read_bytes() == first
    assert {row.check for row in read_verdict(out / "verdict.csv")} >= {
        "boundary_weight", "boundary_derivative", "tail_slope", "moment_x", "step_law_ks"}
    assert json.loads((out / "config.json").read_text())["replicas"] == 3


@pytest.mark.parametrize("argv, code", [
    (["experiment", "spine-marginal", "--replicas", "0"], 2),
    (["experiment", "no-such-preset"], 2),
    (["experiment", "spine-marginal", "--budget", "10"], 3),
    (["experiment", "lemma41", "--budget", "10"], 3),
    (["walk", "--n", "0", "--reps", "10"], 2),
    (["verdict", "does-not-exist"], 2),
])
def test_exit_codes(output_root, tiny_config, argv, code):
    assert main(argv + ["--config", tiny_config] + FAST) == code


def test_walk_prints_an_estimate(output_root, capsys):
    assert main(["walk", "--kind", "stay_above", "--n", "16", "--reps", "500", "--a", "1"] + FAST) == 0
    row = json.loads(capsys.readouterr().out)
    assert 0.0 <= row["estimate"] <= 1.0


def test_simulate_writes_genstats(output_root, tiny_config):
    assert main(["simulate", "--n", "6", "--replicas", "2", "--config", tiny_config] + FAST) == 0
    frame = pd.read_csv(output_root / "genstats.csv")
    assert sorted(frame["replica"].unique().tolist()) == [0, 1]
    assert {"n", "population", "M_n", "W_n"} <= set(frame.columns)


def test_spine_writes_a_realization(output_root, capsys):
    assert main(["spine", "--n", "5", "--seed", "2"] + FAST) == 0
    data = json.loads((output_root / "spine.json").read_text())
    assert data["n"] == 5


def test_check_conditions_report(output_root):
    assert main(["check-conditions", "--reps", "20000"] + FAST) == 0
    report = json.loads((output_root / "conditions.json").read_text())
    assert report["law"]
