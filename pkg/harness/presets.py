"""
Preset registry
"""

from typing import Dict, List, Optional, Type

from core.errors import ConfigError
from reproduction.factory import LawFactory
from .experiment_config import ExperimentConfig
from .preset_base import Preset
from .tree_presets import (IntegralTestPreset, LowerEnvelopePreset, MedianMnPreset,
                           MinimumTailPreset, WnDecayPreset, WnMaxPreset)
from .walk_presets import (BallotScalingPreset, BarrierEventPreset, CheckConditionsPreset,
                           MtoOraclePreset, SpineMarginalPreset)

PRESETS: Dict[str, Type[Preset]] = {
    cls.id: cls for cls in [
        BallotScalingPreset,
        BarrierEventPreset,
        MinimumTailPreset,
        WnDecayPreset,
        IntegralTestPreset,
        LowerEnvelopePreset,
        MedianMnPreset,
        WnMaxPreset,
        CheckConditionsPreset,
        MtoOraclePreset,
        SpineMarginalPreset,
    ]
}


ALIASES: Dict[str, str] = {alias: cls.id for cls in PRESETS.values() for alias in cls.aliases}


def preset_ids() -> List[str]:
    return list(PRESETS)


def canonical_preset_id(preset_id: str) -> str:
    """Registered id for an id or an alias; ConfigError when neither"""
    if preset_id in PRESETS:
        return preset_id
    if preset_id in ALIASES:
        return ALIASES[preset_id]
    known = ", ".join(list(PRESETS) + list(ALIASES))
    raise ConfigError(f"Unknown preset: {preset_id} (known: {known})")


def get_preset_class(preset_id: str) -> Type[Preset]:
    return PRESETS[canonical_preset_id(preset_id)]


def create_preset(config: ExperimentConfig, factory: Optional[LawFactory] = None) -> Preset:
    return get_preset_class(config.preset)(config, factory)
