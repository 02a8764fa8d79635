"""
Reproduction laws, condition checks and the many-to-one oracle
"""

from .interfaces import Brood, BroodBatch, TiltedBatch, ReproductionLaw
from .brood_law import BroodLaw, make_brood_law
from .dyadic_toy import DyadicToyLaw, make_dyadic_toy
from .factory import LawFactory, make_law
from .functionals import CATALOG, get_functional
from .conditions import ConditionReport, ConditionRow, check_conditions
from .many_to_one import ManyToOneResult, many_to_one_check

__all__ = [
    'Brood', 'BroodBatch', 'TiltedBatch', 'ReproductionLaw',
    'BroodLaw', 'make_brood_law', 'DyadicToyLaw', 'make_dyadic_toy',
    'LawFactory', 'make_law', 'CATALOG', 'get_functional',
    'ConditionReport', 'ConditionRow', 'check_conditions',
    'ManyToOneResult', 'many_to_one_check', 'sample_brood',
]


def sample_brood(law: ReproductionLaw, parent_position: float, rng) -> Brood:
    """Children of one parent at parent_position"""
    return law.sample_brood(parent_position, rng)
