"""
Presets driven by forward trees

minimum-tail, wn-decay, median-mn, lower-envelope, integral-test, wn-max.
All but wn-max condition on survival: each replica keeps its first
attempt that survives to the last horizon.
"""

import math
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from core.errors import ConfigError
from core.rng import ReplicaStream
from forward_sim.generation import GenStats, scaled_beta_max
from forward_sim.simulator import ForwardRun, ForwardSimulator
from forward_sim.survival import first_surviving
from .estimators import SlopeFit, fit_linear_slope, fit_loglog_slope
from .preset_base import Preset, Summary, proportion_point, slope_verdict
from .results import VerdictRow

QUALITATIVE_NOTE = "qualitative: truncation hides rare deep excursions, no limit is claimed"


class SurvivingRunPreset(Preset):
    """Base for presets reading generation statistics of surviving runs"""

    min_horizon = 1

    @property
    def horizon(self) -> int:
        return max(self.config.schedule)

    def validate(self) -> None:
        if not self.config.schedule:
            raise ConfigError(f"preset {self.id} needs a schedule (ns or j_min/j_max)")
        if min(self.config.schedule) < self.min_horizon:
            raise ConfigError(f"preset {self.id} needs horizons >= {self.min_horizon}")

    def simulator(self, beta: float = 1.0) -> ForwardSimulator:
        return ForwardSimulator(self.law, self.policy(), beta)

    def estimate_cost(self) -> float:
        return float(self.config.replicas * self.horizon * self.policy().max_population)

    def surviving_run(self, stream: ReplicaStream) -> ForwardRun:
        return first_surviving(self.simulator(), stream, self.horizon,
                               int(self.config.survival.get("max_attempts", 10_000)))

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        run = self.surviving_run(stream)
        return [{"seed": run.seed, "attempt": run.attempt, **row} for row in self.rows_from_run(run)]

    def rows_from_run(self, run: ForwardRun) -> List[Dict[str, Any]]:
        raise NotImplementedError

    @staticmethod
    def survival_point(raw: pd.DataFrame) -> Dict[str, Any]:
        attempts = raw.groupby("replica")["attempt"].first() + 1
        return {"quantity": "survival_rate", "value": float(len(attempts) / attempts.sum()),
                "attempts": int(attempts.sum())}


class MinimumTailPreset(SurvivingRunPreset):
    """P(M_n < (1 + 1/alpha) log n - lambda) decays like e^{-lambda}"""

    id = "minimum-tail"
    aliases = ("lemma41",)
    description = "slope -1 in lambda of log P(M_n < (1+1/alpha) log n - lambda)"
    columns = ["attempt", "n", "M_n", "population", "truncated_mass"]

    def validate(self) -> None:
        super().validate()
        self.require_stable_tail()
        if len(self.config.lambdas) < 3:
            raise ConfigError("minimum-tail needs at least 3 lambdas")

    def rows_from_run(self, run: ForwardRun) -> List[Dict[str, Any]]:
        last: GenStats = run.stats[-1]
        return [{"n": last.n, "M_n": last.M_n, "population": last.population,
                 "truncated_mass": run.truncated_mass}]

    def centering(self, n: int) -> float:
        return (1.0 + 1.0 / self.alpha) * math.log(n)

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        n = self.horizon
        m_n = raw["M_n"].to_numpy(dtype=float)
        for lam in self.config.lambdas:
            point = {"quantity": "tail_probability", "n": n, "lam": lam}
            point.update(proportion_point(int(np.sum(m_n < self.centering(n) - lam)), m_n.size))
            summary.points.append(point)
        summary.points.append(self.survival_point(raw))
        usable = [p for p in summary.points if p.get("hits", 0) > 0]
        if len(usable) >= 3:
            summary.add_fit("lambda", fit_linear_slope([p["lam"] for p in usable],
                                                       [math.log(p["estimate"]) for p in usable]))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        return [slope_verdict("minimum_tail_slope", summary.fits, "lambda", -1.0,
                              self.config.tolerance("minimum_tail_slope"),
                              "log probability against lambda")]


class ScheduleStatsPreset(SurvivingRunPreset):
    """Rows of (n, W_n, M_n) at every horizon of the schedule"""

    columns = ["attempt", "n", "M_n", "W_n", "truncated_mass"]

    def rows_from_run(self, run: ForwardRun) -> List[Dict[str, Any]]:
        by_n = {s.n: s for s in run.stats}
        mass = np.cumsum([s.truncated_mass for s in run.stats])
        return [{"n": n, "M_n": by_n[n].M_n, "W_n": by_n[n].W_n, "truncated_mass": float(mass[n])}
                for n in self.config.schedule]


class WnDecayPreset(ScheduleStatsPreset):
    """log median W_n against log n"""

    id = "wn-decay"
    description = "slope -1/alpha of log median W_n against log n"

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        medians = raw.groupby("n", sort=True)["W_n"].median()
        summary.points = [{"quantity": "median_W_n", "n": int(n), "value": float(v)}
                          for n, v in medians.items()]
        summary.points.append(self.survival_point(raw))
        pts = [(p["n"], p["value"]) for p in summary.points if p.get("value", 0) > 0 and "n" in p]
        if len(pts) >= 3:
            summary.add_fit("log_n", fit_loglog_slope(pts))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        if not self.law.satisfies_stable_tail:
            return [VerdictRow.report("wn_decay_slope", summary.fits.get("log_n", {}).get("slope", math.nan),
                                      "law violates the stable tail condition; report only")]
        return [slope_verdict("wn_decay_slope", summary.fits, "log_n", -1.0 / self.alpha,
                              self.config.tolerance("wn_decay_slope"),
                              "heuristic centering of n^(1/alpha) W_n")]


class MedianMnPreset(ScheduleStatsPreset):
    """median M_n against log n"""

    id = "median-mn"
    description = "slope 1 + 1/alpha of median M_n against log n"

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        medians = raw.groupby("n", sort=True)["M_n"].median()
        summary.points = [{"quantity": "median_M_n", "n": int(n), "value": float(v)}
                          for n, v in medians.items()]
        summary.points.append(self.survival_point(raw))
        if len(medians) >= 3:
            summary.add_fit("log_n", fit_linear_slope(np.log(medians.index.to_numpy(dtype=float)),
                                                      medians.to_numpy(dtype=float)))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        if not self.law.satisfies_stable_tail:
            return [VerdictRow.report("median_mn_slope", summary.fits.get("log_n", {}).get("slope", math.nan),
                                      "law violates the stable tail condition; report only")]
        return [slope_verdict("median_mn_slope", summary.fits, "log_n", 1.0 + 1.0 / self.alpha,
                              self.config.tolerance("median_mn_slope"))]


class LowerEnvelopePreset(SurvivingRunPreset):
    """Running minimum of (M_k - (1/alpha) log k) / log log k"""

    id = "lower-envelope"
    description = "qualitative lower envelope of (M_n - (1/alpha) log n) / log log n"
    columns = ["attempt", "n", "ratio", "running_min"]
    qualitative = True
    min_horizon = 3

    def validate(self) -> None:
        super().validate()
        self.require_stable_tail()

    def ratios(self, run: ForwardRun) -> np.ndarray:
        k = np.arange(len(run.stats), dtype=float)
        m = np.array([s.M_n for s in run.stats])
        out = np.full(k.size, np.nan)
        ok = k >= 3
        out[ok] = (m[ok] - np.log(k[ok]) / self.alpha) / np.log(np.log(k[ok]))
        return out

    def rows_from_run(self, run: ForwardRun) -> List[Dict[str, Any]]:
        ratio = self.ratios(run)
        running = np.fmin.accumulate(ratio)
        return [{"n": n, "ratio": float(ratio[n]), "running_min": float(running[n])}
                for n in self.config.schedule]

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        grouped = raw.groupby("n", sort=True)
        for n, group in grouped:
            summary.points.append({"quantity": "envelope", "n": int(n),
                                   "median_ratio": float(group["ratio"].median()),
                                   "mean_running_min": float(group["running_min"].mean()),
                                   "min_running_min": float(group["running_min"].min())})
        summary.points.append(self.survival_point(raw))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        return [VerdictRow.report(f"running_min_n{p['n']}", p["mean_running_min"], QUALITATIVE_NOTE)
                for p in summary.points if p["quantity"] == "envelope"]


class IntegralTestPreset(SurvivingRunPreset):
    """Dips below (1/alpha) log k - f(k) for f = log log and f = 2 log log"""

    id = "integral-test"
    description = "qualitative dip counts below (1/alpha) log n - f(n), divergent vs convergent f"
    columns = ["attempt", "n", "dips_loglog", "dips_2loglog"]
    qualitative = True
    min_horizon = 3

    def validate(self) -> None:
        super().validate()
        self.require_stable_tail()

    def rows_from_run(self, run: ForwardRun) -> List[Dict[str, Any]]:
        k = np.arange(len(run.stats), dtype=float)
        m = np.array([s.M_n for s in run.stats])
        ok = k >= 3
        base = np.where(ok, np.log(np.maximum(k, 1.0)) / self.alpha, -np.inf)
        loglog = np.where(ok, np.log(np.log(np.maximum(k, 3.0))), 0.0)
        once = np.cumsum(ok & (m < base - loglog))
        twice = np.cumsum(ok & (m < base - 2.0 * loglog))
        return [{"n": n, "dips_loglog": int(once[n]), "dips_2loglog": int(twice[n])}
                for n in self.config.schedule]

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        for n, group in raw.groupby("n", sort=True):
            summary.points.append({"quantity": "dips", "n": int(n),
                                   "mean_loglog": float(group["dips_loglog"].mean()),
                                   "mean_2loglog": float(group["dips_2loglog"].mean()),
                                   "any_2loglog": float((group["dips_2loglog"] > 0).mean())})
        summary.points.append(self.survival_point(raw))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        last = [p for p in summary.points if p["quantity"] == "dips"][-1]
        return [VerdictRow.report(f"dips_loglog_n{last['n']}", last["mean_loglog"], QUALITATIVE_NOTE),
                VerdictRow.report(f"dips_2loglog_n{last['n']}", last["mean_2loglog"], QUALITATIVE_NOTE)]


class WnMaxPreset(Preset):
    """P(max_{n<=k<=m} k^{1/alpha} W_k^beta > lambda) against log n / n^{1/alpha} + (1/lambda)(m/n)^{1/alpha}"""

    id = "wn-max"
    description = "tail of the running maximum of k^(1/alpha) W_k^beta against its bounding shape"
    columns = ["value"]

    def validate(self) -> None:
        self.require_stable_tail()
        n, m = int(self.param("n")), int(self.param("m"))
        if not 1 <= n <= m:
            raise ConfigError("wn-max needs 1 <= n <= m")
        if float(self.param("beta", 1.0)) < 0:
            raise ConfigError("wn-max needs beta >= 0")
        lambdas = self.config.lambdas
        if len(lambdas) < 2 or min(lambdas) <= 0:
            raise ConfigError("wn-max needs at least 2 lambdas > 0")

    def estimate_cost(self) -> float:
        return float(self.config.replicas * int(self.param("m")) * self.policy().max_population)

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        n, m = int(self.param("n")), int(self.param("m"))
        sim = ForwardSimulator(self.law, self.policy(), float(self.param("beta", 1.0)))
        run = sim.run(stream, m)
        return [{"value": scaled_beta_max(run.stats, self.alpha, n, m)}]

    def shape(self, lam: float) -> float:
        n, m = int(self.param("n")), int(self.param("m"))
        a = 1.0 / self.alpha
        return math.log(n) / n ** a + (m / n) ** a / lam

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        lambdas = self.config.lambdas
        replica = raw["replica"].to_numpy(dtype=np.int64)
        values = raw["value"].to_numpy(dtype=float)
        fit_half, check_half = values[replica % 2 == 0], values[replica % 2 == 1]
        for i, lam in enumerate(lambdas):
            point = {"lam": lam, "shape": self.shape(lam)}
            point.update(proportion_point(int(np.sum(values > lam)), values.size))
            # disjoint replica subsets, one per lambda
            own = values[replica % len(lambdas) == i]
            if own.size:
                point["subset"] = proportion_point(int(np.sum(own > lam)), own.size)
            if fit_half.size:
                point["fit_ratio"] = float(np.mean(fit_half > lam)) / point["shape"]
            if check_half.size:
                point["held_out"] = proportion_point(int(np.sum(check_half > lam)), check_half.size)
            summary.points.append(point)

        ratios = [p["fit_ratio"] for p in summary.points if "fit_ratio" in p]
        if ratios:
            summary.add_fit("constant", SlopeFit(max(ratios), math.nan))
        # saturated proportions carry no decay information
        usable = [p for p in summary.points if 0.0 < p["estimate"] <= 0.5]
        if len(usable) >= 3:
            summary.add_fit("decay", fit_loglog_slope([(p["lam"], p["estimate"]) for p in usable]))
            summary.add_fit("shape", fit_loglog_slope([(p["lam"], p["shape"]) for p in usable]))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        rows = []
        pts = [p for p in summary.points if "subset" in p]
        if len(pts) >= 2:
            rise = max(b["subset"]["low"] - a["subset"]["high"] for a, b in zip(pts, pts[1:]))
            rows.append(VerdictRow.judged("nonincreasing_in_lambda", rise, 0.0, None, rise <= 0.0,
                                          "disjoint replica subsets per lambda; Wilson intervals"))
        else:
            rows.append(VerdictRow.judged("nonincreasing_in_lambda", math.nan, 0.0, None, False,
                                          "fewer replicas than lambdas"))

        if "constant" in summary.fits and all("held_out" in p for p in summary.points):
            const = summary.fits["constant"]["slope"]
            excess = max(p["held_out"]["low"] - const * p["shape"] for p in summary.points)
            rows.append(VerdictRow.judged("below_fitted_shape", excess, 0.0, None, excess <= 1e-12,
                                          f"constant {const:.4g} fitted on even replicas, "
                                          f"checked on odd"))
        else:
            rows.append(VerdictRow.judged("below_fitted_shape", math.nan, 0.0, None, False,
                                          "needs at least 2 replicas"))

        if "decay" in summary.fits:
            slope = summary.fits["decay"]["slope"]
            target = summary.fits["shape"]["slope"]
            tol = self.config.tolerance("wn_max_slope")
            rows.append(VerdictRow.judged("decay_not_slower_than_shape", slope, target, tol,
                                          slope <= target + tol,
                                          "log-log slope in lambda against the shape's"))
        else:
            rows.append(VerdictRow.report("decay_not_slower_than_shape", math.nan,
                                          "fewer than 3 lambdas with 0 < P <= 1/2"))
        return rows
