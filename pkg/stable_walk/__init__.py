"""
Associated walk: step law, paths, ballot estimates and tail-index fits
"""

from .step_law import StepLaw, make_step_law, sample_step, sample_steps, ks_distance
from .walk_path import WalkPath, walk_path, walk_blocks
from .ballot import BallotKind, BallotEstimate, ballot_probability, ballot_curve
from .tail_index import TailIndexFit, fit_tail_index

__all__ = [
    'StepLaw', 'make_step_law', 'sample_step', 'sample_steps', 'ks_distance',
    'WalkPath', 'walk_path', 'walk_blocks',
    'BallotKind', 'BallotEstimate', 'ballot_probability', 'ballot_curve',
    'TailIndexFit', 'fit_tail_index',
]
