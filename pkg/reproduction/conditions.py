"""
Condition checker for reproduction laws

Estimates, from sampled broods, every quantity the boundary-case and
stable-tail conditions constrain, one report row per quantity.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from core.errors import DomainError
from harness.estimators import fit_loglog_slope, mean_interval
from stable_walk.tail_index import fit_tail_index
from .interfaces import BroodBatch, ReproductionLaw

logger = logging.getLogger(__name__)

SIZE_CAPS = (10.0, 100.0, 1000.0, 10000.0)

# X is bounded, so its row must also be stable under halving; X~ may have infinite variance
MOMENT_ROWS = {"moment_x": True, "moment_x_tilde": False}


@dataclass(frozen=True)
class ConditionRow:
    condition: str
    estimate: float
    stderr: float
    ci_low: float
    ci_high: float
    reps: int
    seed: str
    target: Optional[float] = None
    passed: Optional[bool] = None
    note: str = ""


@dataclass
class ConditionReport:
    law: Dict[str, Any]
    reps: int
    seed: str
    rows: List[ConditionRow] = field(default_factory=list)

    def row(self, name: str) -> ConditionRow:
        for r in self.rows:
            if r.condition == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {"law": self.law, "reps": self.reps, "seed": self.seed,
                "rows": [asdict(r) for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)


def _per_brood(batch: BroodBatch, values: np.ndarray, reps: int) -> np.ndarray:
    return np.bincount(batch.parent_index, weights=values, minlength=reps)


def left_tail_level(law: ReproductionLaw) -> float:
    """Twice the depth of the left end of the weighted intensity's support"""
    depth = -min(low for _, low, _, _ in law.intensity_targets())
    return 2.0 * max(depth, 1e-9)


def moment_alpha(law: ReproductionLaw) -> float:
    return law.alpha if law.satisfies_stable_tail else 1.5


def hill_order(positives: int) -> int:
    return min(positives - 1, max(10, positives // 20))


def moment_passes(name: str, full_mean: float, half_mean: float, half_stderr: float) -> bool:
    """Finite, and for X also stable between the full sample and its first half"""
    stable = abs(full_mean - half_mean) <= 2.0 * half_stderr + 1e-12
    return bool(np.isfinite(full_mean) and (stable or not MOMENT_ROWS[name]))


def brood_columns(law: ReproductionLaw, batch: BroodBatch, reps: int,
                  y_grid: Sequence[float]) -> Dict[str, np.ndarray]:
    """
    Per-brood values whose means the conditions constrain

    Keys: weight, derivative, tail_<y>, left_tail, moment_x, moment_x_tilde
    and intensity_<label>; each value has one entry per brood.
    """
    weight = batch.weights()
    v = batch.displacement
    x = _per_brood(batch, weight, reps)
    columns = {"weight": x, "derivative": _per_brood(batch, v * weight, reps)}
    for y in y_grid:
        columns[f"tail_{float(y):g}"] = _per_brood(batch, weight * (v >= float(y)), reps)
    columns["left_tail"] = _per_brood(batch, weight * (v <= -left_tail_level(law)), reps)

    # X = sum e^{-V} and X~ = sum V_+ e^{-V}
    alpha = moment_alpha(law)
    x_tilde = _per_brood(batch, np.maximum(v, 0.0) * weight, reps)
    columns["moment_x"] = x * np.log(np.maximum(x, 1.0)) ** alpha
    columns["moment_x_tilde"] = x_tilde * np.log(np.maximum(x_tilde, 1.0)) ** (alpha - 1.0)

    for label, low, high, _ in law.intensity_targets():
        inside = (v >= low - 1e-12) & (v <= high + 1e-12)
        columns[f"intensity_{label}"] = _per_brood(batch, weight * inside, reps)
    return columns


def step_law_ks(law: ReproductionLaw, samples: np.ndarray) -> Tuple[float, float]:
    """One-sample KS (statistic, p-value) of walk increments against the step CDF"""
    result = stats.kstest(np.asarray(samples, dtype=float), law.step_cdf)
    return float(result.statistic), float(result.pvalue)


def check_conditions(law: ReproductionLaw, reps: int, y_grid: Sequence[float],
                     rng: np.random.Generator, seed: str = "", z_score: float = 3.0,
                     tail_tolerance: float = 0.1, min_reps: int = 10_000,
                     ks_pvalue: float = 0.01) -> ConditionReport:
    """
    Estimate the boundary, tail and moment conditions of a law

    Args:
        reps: Number of broods sampled (>= min_reps); as many walk increments
            are drawn for the step-law KS row
        y_grid: Increasing positive levels for the right-tail fit
        z_score: Stderr multiple for pass/fail of exact-valued rows
    """
    if reps < min_reps:
        raise DomainError(f"check_conditions needs reps >= {min_reps}")
    y_grid = [float(y) for y in y_grid]
    if len(y_grid) < 3 or min(y_grid) <= 0 or any(b <= a for a, b in zip(y_grid, y_grid[1:])):
        raise DomainError("y_grid must hold at least 3 increasing positive levels")

    report = ConditionReport(law.to_dict(), reps, seed)
    batch = law.sample_broods(reps, rng)
    v = batch.displacement
    columns = brood_columns(law, batch, reps, y_grid)

    def add_mean(name: str, per_brood: np.ndarray, target: Optional[float], note: str = ""):
        est = mean_interval(per_brood)
        passed = None
        if target is not None:
            passed = abs(est.mean - target) <= z_score * est.stderr + 1e-12
        report.rows.append(ConditionRow(name, est.mean, est.stderr, est.low, est.high,
                                        reps, seed, target, passed, note))
        return est

    add_mean("boundary_mean_weight", columns["weight"], 1.0)
    add_mean("boundary_mean_derivative", columns["derivative"], 0.0)

    # right tail of the weighted intensity
    points = []
    for y in y_grid:
        est = add_mean(f"tail_weight_y{y:g}", columns[f"tail_{y:g}"], None)
        points.append((y, est.mean))
    if law.satisfies_stable_tail:
        if any(p[1] <= 0 for p in points):
            report.rows.append(ConditionRow("tail_slope", float("nan"), float("nan"), float("nan"),
                                            float("nan"), reps, seed, -law.alpha, False,
                                            "zero tail estimate on the grid; raise reps"))
        else:
            fit = fit_loglog_slope(points)
            report.rows.append(ConditionRow(
                "tail_slope", fit.slope, fit.stderr, fit.slope - 2 * fit.stderr,
                fit.slope + 2 * fit.stderr, reps, seed, -law.alpha,
                abs(fit.slope + law.alpha) <= tail_tolerance))
        positive = v[v > 0]
        k = hill_order(positive.size)
        if k >= 10:
            hill = fit_tail_index(positive, k)
            report.rows.append(ConditionRow(
                "tail_index_hill", hill.alpha_hat, hill.stderr, hill.alpha_hat - 2 * hill.stderr,
                hill.alpha_hat + 2 * hill.stderr, reps, seed, law.alpha,
                abs(hill.alpha_hat - law.alpha) <= tail_tolerance,
                "brood locations beyond the Pareto cutoff"))
    else:
        beyond = all(p[1] == 0.0 for p in points)
        report.rows.append(ConditionRow(
            "tail_slope", float("nan"), float("nan"), float("nan"), float("nan"), reps, seed,
            None, None, "violates the stable tail condition by design"
            + ("; exact zero beyond the support" if beyond else "")))

    # left tail vanishes beyond the support depth
    add_mean("left_tail_weight", columns["left_tail"], 0.0, f"level -{left_tail_level(law):.3g}")

    half = reps // 2
    for name in MOMENT_ROWS:
        values = columns[name]
        full = mean_interval(values)
        first = mean_interval(values[:half])
        report.rows.append(ConditionRow(name, full.mean, full.stderr, full.low, full.high,
                                        reps, seed, None,
                                        moment_passes(name, full.mean, first.mean, first.stderr),
                                        f"half-sample estimate {first.mean:.4g}"))

    # weighted intensity equals the associated step density
    for label, _, _, exact in law.intensity_targets():
        add_mean(f"intensity_{label}", columns[f"intensity_{label}"], exact)

    # mean offspring is infinite under a stable tail; capped means keep growing
    sizes = batch.multiplicity
    for cap in SIZE_CAPS:
        add_mean(f"offspring_capped_{cap:g}", _per_brood(batch, np.minimum(sizes, cap), reps), None,
                 "mean brood size with group sizes capped")
    empty = 1.0 - np.unique(batch.parent_index).size / reps
    report.rows.append(ConditionRow("empty_brood_fraction", empty,
                                    math.sqrt(empty * (1 - empty) / reps), float("nan"),
                                    float("nan"), reps, seed, None, None,
                                    "extinction is possible when positive"))

    statistic, pvalue = step_law_ks(law, law.walk_increments(reps, rng))
    report.rows.append(ConditionRow("step_law_ks", statistic, float("nan"), float("nan"),
                                    float("nan"), reps, seed, None, pvalue > ks_pvalue,
                                    f"one-sample KS p-value {pvalue:.4g}"))

    logger.info(f"Condition check for {law.name}: "
                f"{sum(1 for r in report.rows if r.passed is False)} failing rows")
    return report
