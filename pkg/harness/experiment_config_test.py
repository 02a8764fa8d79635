"""
Tests for experiment configuration
"""

import json

import pytest
import yaml

from core.config import ConfigManager
from core.errors import ConfigError
from .experiment_config import ExperimentConfig, dump_yaml


def test_defaults_come_from_the_default_config():
    config = ExperimentConfig()
    assert config.law["family"] == "brood"
    assert config.truncation["max_population"] == 200000
    assert config.tolerances["ballot_slope"] == 0.07


def test_round_trip_through_dict_json_and_yaml(tmp_path):
    config = ExperimentConfig.from_manager(ConfigManager(), "minimum-tail", {"replicas": 17})
    assert ExperimentConfig.from_dict(config.to_dict()) == config
    assert ExperimentConfig.from_dict(json.loads(config.to_json())) == config
    assert ExperimentConfig.from_dict(yaml.safe_load(dump_yaml(config))) == config
    path = tmp_path / "config.json"
    config.save(path)
    assert ExperimentConfig.load(path) == config
    assert path.read_text() == config.to_json() + "\n"


def test_from_manager_reads_preset_parameters():
    config = ExperimentConfig.from_manager(ConfigManager(), "wn-decay", {"master_seed": 5, "budget": None})
    assert config.master_seed == 5
    assert config.budget == 2.0e11
    assert config.schedule == [2 ** j for j in range(5, 12)]


def test_yaml_experiment_file_overrides(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text("run:\n  replicas: 3\npresets:\n  median-mn:\n    j_min: 2\n    j_max: 4\n")
    config = ExperimentConfig.from_manager(ConfigManager(override_file=str(path)), "median-mn")
    assert config.replicas == 3
    assert config.schedule == [4, 8, 16]


def test_explicit_schedule_and_lambdas():
    config = ExperimentConfig(params={"ns": [64, 128], "lambdas": [0.0, 1.0]})
    assert config.schedule == [64, 128]
    assert config.lambdas == [0.0, 1.0]
    assert ExperimentConfig(params={"n": 16}).schedule == [16]


@pytest.mark.parametrize("replicas", [0, -3, 2.5, True])
def test_replicas_must_be_positive_integers(replicas):
    with pytest.raises(ConfigError):
        ExperimentConfig(replicas=replicas)


@pytest.mark.parametrize("params", [
    {"ns": [64, 64]},
    {"ns": [128, 64]},
    {"j_min": 5, "j_max": 4},
    {"lambdas": [1.0, 0.5]},
])
def test_schedule_and_grid_must_increase(params):
    with pytest.raises(ConfigError):
        ExperimentConfig(params=params)


def test_unknown_fields_and_bad_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"preset": "wn-decay", "workers": 4})
    with pytest.raises(ConfigError):
        ExperimentConfig(master_seed=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig(budget=0.0)


def test_tolerance_lookup():
    config = ExperimentConfig()
    assert config.tolerance("z_score") == 3.0
    assert config.tolerance("missing", 0.5) == 0.5
    with pytest.raises(ConfigError):
        config.tolerance("missing")
