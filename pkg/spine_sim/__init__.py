"""
Spine simulation under the size-biased measure, barrier events and the
estimators built on them.
"""

from .spine import SpineBatch, SpineRealization, sample_spine, sample_spines, tilted_brood
from .barriers import BarrierSpec, BarrierTracker, brother_term, event_AB
from .estimators import (SIZE_BIASED_CATALOG, BarrierEstimate, BarrierMode, QTree,
                         estimate_barrier_event, first_moment_proxy, forward_estimate,
                         forward_functional, grow_brother_subtrees, size_biased_functional,
                         walk_functional)

__all__ = [
    "SpineBatch", "SpineRealization", "sample_spine", "sample_spines", "tilted_brood",
    "BarrierSpec", "BarrierTracker", "brother_term", "event_AB",
    "SIZE_BIASED_CATALOG", "BarrierEstimate", "BarrierMode", "QTree",
    "estimate_barrier_event", "first_moment_proxy", "forward_estimate", "forward_functional",
    "grow_brother_subtrees", "size_biased_functional", "walk_functional",
]
