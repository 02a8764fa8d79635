"""
Law Factory

Builds reproduction laws from the `law:` configuration section.
"""

import logging
from typing import Any, Dict, Mapping, Optional

from core.config import ConfigManager
from core.errors import ConfigError
from stable_walk.step_law import make_step_law
from .brood_law import BroodLaw
from .dyadic_toy import DyadicToyLaw
from .interfaces import ReproductionLaw

FAMILIES = ("brood", "dyadic")


class LawFactory:
    """Factory for reproduction law instances"""

    def __init__(self, config: Optional[ConfigManager] = None):
        self.config = config
        self.logger = logging.getLogger("LawFactory")
        # laws are immutable; cache by spec
        self._instances: Dict[tuple, ReproductionLaw] = {}

    def default_spec(self) -> Dict[str, Any]:
        if self.config is None:
            return {"family": "brood", "alpha": 1.5, "x_m": 1.0, "d": 2.0}
        return self.config.section("law")

    def create(self, spec: Optional[Mapping[str, Any]] = None) -> ReproductionLaw:
        """Create (or reuse) the law described by spec"""
        spec = dict(self.default_spec() if spec is None else spec)
        family = str(spec.get("family", "brood")).lower()
        if family not in FAMILIES:
            raise ConfigError(f"Unknown law family: {family} (known: {', '.join(FAMILIES)})")

        if family == "dyadic":
            key = ("dyadic",)
        else:
            key = ("brood", float(spec.get("alpha", 1.5)), float(spec.get("x_m", 1.0)),
                   float(spec.get("d", 2.0)))
        if key in self._instances:
            return self._instances[key]

        if family == "dyadic":
            law: ReproductionLaw = DyadicToyLaw()
        else:
            law = BroodLaw(make_step_law(key[1], key[2], key[3]))
        self.logger.info(f"Created {family} law {law.to_dict()}")
        self._instances[key] = law
        return law


def make_law(spec: Optional[Mapping[str, Any]] = None) -> ReproductionLaw:
    return LawFactory().create(spec)
