"""
StableBRW Harness
=================

Experiment presets, deterministic replica orchestration, persistence and
the command-line front end.

Only the estimator utilities are re-exported here: the simulation packages
import them, so this module must not import the presets.
"""

from .estimators import (MeanEstimate, SlopeFit, fit_linear_slope, fit_loglog_slope,
                         intervals_overlap, mean_interval, wilson_interval)

__all__ = [
    "MeanEstimate", "SlopeFit", "fit_linear_slope", "fit_loglog_slope", "intervals_overlap",
    "mean_interval", "wilson_interval",
]
