"""
Experiment configuration

An ExperimentConfig is everything that determines the outcome of an
experiment: preset, law, seeds, schedule, grids, truncation policy,
tolerances and budget. Worker count and output location are runtime
choices and stay out of it, so two runs differing only in those produce
identical results.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import yaml

from core.config import ConfigManager, load_config_file
from core.errors import ConfigError

logger = logging.getLogger(__name__)


def _default_section(name: str) -> Dict[str, Any]:
    return ConfigManager().section(name)


@dataclass
class ExperimentConfig:
    """
    Attributes:
        preset: Preset id (see `harness.presets.PRESETS`)
        law: Law spec for LawFactory (family, alpha, x_m, d)
        master_seed: Seed from which every replica stream is split
        replicas: Number of replicas, >= 1
        budget: Particle-step budget for the pre-flight cost guard
        truncation: TruncationPolicy parameters
        barrier: K, c_prime and forward_max_n
        survival: max_attempts and min_rate for survival conditioning
        many_to_one: representatives and max_tree_n
        tolerances: Verdict tolerances
        params: Preset parameters (schedule, lambda/beta grids, sample sizes)
    """
    preset: str = "ballot-scaling"
    law: Dict[str, Any] = field(default_factory=lambda: _default_section("law"))
    master_seed: int = 20240601
    replicas: int = 200
    budget: float = 2.0e11
    truncation: Dict[str, Any] = field(default_factory=lambda: _default_section("truncation"))
    barrier: Dict[str, Any] = field(default_factory=lambda: _default_section("barrier"))
    survival: Dict[str, Any] = field(default_factory=lambda: _default_section("survival"))
    many_to_one: Dict[str, Any] = field(default_factory=lambda: _default_section("many_to_one"))
    tolerances: Dict[str, Any] = field(default_factory=lambda: _default_section("tolerances"))
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Raises:
            ConfigError: replicas < 1, negative seed, nonpositive budget or a
                schedule that is not strictly increasing
        """
        if not isinstance(self.replicas, int) or isinstance(self.replicas, bool) or self.replicas < 1:
            raise ConfigError(f"replicas must be an integer >= 1, got {self.replicas!r}")
        if int(self.master_seed) < 0:
            raise ConfigError("master_seed must be >= 0")
        if not float(self.budget) > 0:
            raise ConfigError("budget must be > 0")
        if "ns" in self.params or "j_min" in self.params or "j_max" in self.params:
            schedule = self.schedule
            if not schedule or min(schedule) < 1:
                raise ConfigError("schedule must hold positive horizons")
            if any(b <= a for a, b in zip(schedule, schedule[1:])):
                raise ConfigError(f"schedule must be strictly increasing, got {schedule}")
        lambdas = self.params.get("lambdas")
        if lambdas is not None and any(b <= a for a, b in zip(lambdas, lambdas[1:])):
            raise ConfigError("lambda grid must be strictly increasing")

    @property
    def schedule(self) -> List[int]:
        """Horizons: explicit `ns`, else the dyadic n_j = 2^j for j_min <= j <= j_max"""
        if "ns" in self.params:
            return [int(n) for n in self.params["ns"]]
        if "j_max" in self.params:
            j_min = int(self.params.get("j_min", 1))
            return [2 ** j for j in range(j_min, int(self.params["j_max"]) + 1)]
        if "n" in self.params:
            return [int(self.params["n"])]
        return []

    @property
    def lambdas(self) -> List[float]:
        return [float(x) for x in self.params.get("lambdas", [])]

    def tolerance(self, name: str, default: Optional[float] = None) -> float:
        if name in self.tolerances:
            return float(self.tolerances[name])
        if default is None:
            raise ConfigError(f"no tolerance '{name}' configured")
        return float(default)

    def to_dict(self) -> Dict[str, Any]:
        return json.loads(json.dumps(asdict(self)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'ExperimentConfig':
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown experiment fields: {', '.join(sorted(unknown))}")
        values = dict(data)
        if "replicas" in values and isinstance(values["replicas"], float) \
                and values["replicas"].is_integer():
            values["replicas"] = int(values["replicas"])
        return cls(**values)

    @classmethod
    def from_manager(cls, manager: ConfigManager, preset: str,
                     overrides: Optional[Mapping[str, Any]] = None) -> 'ExperimentConfig':
        """
        Build the config of a preset from the merged configuration tree

        Args:
            manager: Loaded configuration (defaults, user file, --config file)
            preset: Preset id; its parameters come from presets.<preset>
            overrides: Values from the command line (master_seed, replicas, budget)
        """
        data: Dict[str, Any] = {
            "preset": preset,
            "law": manager.section("law"),
            "master_seed": int(manager.get("run.master_seed", 20240601)),
            "replicas": int(manager.get("run.replicas", 200)),
            "budget": float(manager.get("run.budget", 2.0e11)),
            "truncation": manager.section("truncation"),
            "barrier": manager.section("barrier"),
            "survival": manager.section("survival"),
            "many_to_one": manager.section("many_to_one"),
            "tolerances": manager.section("tolerances"),
            "params": manager.section(f"presets.{preset}"),
        }
        for key, value in (overrides or {}).items():
            if value is not None:
                data[key] = value
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'ExperimentConfig':
        """Load a saved config (JSON or YAML)"""
        return cls.from_dict(load_config_file(path))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n")
        logger.debug(f"Saved experiment config to {path}")


def dump_yaml(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), default_flow_style=False, sort_keys=True)
