"""
Forward simulation of the branching random walk: grouped generations,
truncation policies, per-generation statistics and survival conditioning.
"""

from .generation import GenStats, Generation, compute_stats, scaled_beta_max
from .simulator import (CSV_COLUMNS, ForwardRun, ForwardSimulator, PathTracker, genstats_frame,
                        read_genstats_csv, run_forward, step_generation, write_genstats_csv)
from .survival import SurvivalResult, first_surviving, survival_runs
from .truncation import TruncationPolicy

__all__ = [
    "CSV_COLUMNS", "ForwardRun", "ForwardSimulator", "GenStats", "Generation", "PathTracker",
    "SurvivalResult", "TruncationPolicy", "compute_stats", "first_surviving", "genstats_frame",
    "read_genstats_csv", "run_forward", "scaled_beta_max", "step_generation", "survival_runs",
    "write_genstats_csv",
]
