"""
Configuration Management System

Handles loading, merging, and accessing configuration data from YAML files.
The defaults in config/default_config.yaml are merged with an optional
config/user_config.yaml and then with an optional experiment file given on
the command line. Experiment files may be YAML or JSON (JSON parses as YAML).
"""

import os
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, TypeVar, Union

import yaml

from .errors import ConfigError

T = TypeVar('T')

OUTPUT_ROOT_ENV = "STABLEBRW_OUTPUT_ROOT"
_MISSING = object()


class ConfigPath:
    """
    Dot-notation view into a ConfigManager

    manager.config.truncation.max_population() reads the value (None when
    absent); pass a default to the call to override that.
    """

    __slots__ = ("_manager", "_path")

    def __init__(self, manager: "ConfigManager", path: str = ""):
        self._manager = manager
        self._path = path

    def __getattr__(self, name: str) -> "ConfigPath":
        if name.startswith("__"):
            raise AttributeError(name)
        return ConfigPath(self._manager, f"{self._path}.{name}" if self._path else name)

    def __getitem__(self, name: str) -> "ConfigPath":
        # preset ids contain dashes: config.presets["wn-max"].m()
        return self.__getattr__(name)

    def __call__(self, default: Optional[T] = None) -> Union[T, Any]:
        if not self._path:
            return self._manager.to_dict()
        return self._manager.get(self._path, default)

    def exists(self) -> bool:
        return bool(self._path) and self._manager.get(self._path, _MISSING) is not _MISSING

    def __repr__(self) -> str:
        return f"ConfigPath({self._path or '<root>'})"


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a YAML or JSON configuration file into a dict"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Configuration file {path} not found")
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to parse configuration {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Configuration {path} must contain a mapping at top level")
    return data


def merge_configs(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge override into base (in place) and return base"""
    for key, value in override.items():
        if key in base and isinstance(base[key], dict) and isinstance(value, dict):
            merge_configs(base[key], value)
        else:
            base[key] = value
    return base


class ConfigManager:
    """
    Manages configuration loading, merging, and access.

    Features:
    - Loads defaults from config/default_config.yaml
    - Merges config/user_config.yaml and an optional override file
    - Dot notation access to configuration values
    - Output root resolution from STABLEBRW_OUTPUT_ROOT
    """

    def __init__(self, config_dir: Optional[str] = None,
                 config_name: str = "default_config.yaml",
                 override_file: Optional[str] = None):
        """Initialize the configuration manager"""
        self.logger = logging.getLogger("ConfigManager")
        self._config_data: Dict[str, Any] = {}

        if config_dir is None:
            self._config_dir = Path(__file__).parent.parent / "config"
        else:
            self._config_dir = Path(config_dir)

        self._config_file = self._config_dir / config_name
        self._override_file = Path(override_file) if override_file else None
        self.reload()

    def reload(self) -> None:
        """Reload configuration from files"""
        self.logger.debug(f"Loading configuration from {self._config_file}")
        self._config_data = load_config_file(self._config_file)

        user_config_file = self._config_dir / "user_config.yaml"
        if user_config_file.exists():
            self.logger.info(f"Loading user configuration from {user_config_file}")
            merge_configs(self._config_data, load_config_file(user_config_file))

        if self._override_file is not None:
            self.logger.info(f"Loading experiment configuration from {self._override_file}")
            merge_configs(self._config_data, load_config_file(self._override_file))

    def get(self, path: str, default: Optional[T] = None) -> Union[T, Any]:
        """
        Get a configuration value by path string (e.g., 'truncation.ceiling_scale')
        Returns default if path doesn't exist
        """
        data = self._config_data
        try:
            for part in path.split('.'):
                data = data[part]
            return data
        except (KeyError, TypeError):
            return default

    def set(self, path: str, value: Any) -> None:
        """
        Set a configuration value by path string
        Creates intermediate dictionaries if they don't exist
        """
        parts = path.split('.')
        data = self._config_data
        for part in parts[:-1]:
            if part not in data or not isinstance(data[part], dict):
                data[part] = {}
            data = data[part]
        data[parts[-1]] = value

    def section(self, path: str) -> Dict[str, Any]:
        """Copy of a nested section, empty if absent"""
        value = self.get(path, {})
        if not isinstance(value, dict):
            raise ConfigError(f"Configuration section '{path}' is not a mapping")
        return json.loads(json.dumps(value))

    def output_root(self) -> Path:
        """Output root: environment variable first, then system.output_root"""
        env_root = os.environ.get(OUTPUT_ROOT_ENV)
        if env_root:
            return Path(env_root)
        return Path(self.get("system.output_root", "results"))

    @property
    def config(self) -> ConfigPath:
        """Root of dot-notation access: manager.config.law.family()"""
        return ConfigPath(self)

    def to_dict(self) -> Dict[str, Any]:
        """Deep copy of the merged configuration"""
        return json.loads(json.dumps(self._config_data))

    def to_json(self) -> str:
        return json.dumps(self._config_data, indent=2, sort_keys=True)
