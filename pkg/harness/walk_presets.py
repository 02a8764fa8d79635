"""
Presets driven by walks, spines and single broods

ballot-scaling, barrier-event, check-conditions, mto-oracle, spine-marginal
"""

import math
from typing import Any, Dict, List

import numpy as np
import pandas as pd
from scipy import stats

from core.errors import ConfigError, DomainError
from core.rng import ReplicaStream
from reproduction.conditions import (MOMENT_ROWS, brood_columns, hill_order, left_tail_level,
                                     moment_passes, step_law_ks)
from reproduction.dyadic_toy import DyadicToyLaw
from reproduction.functionals import catalog_names, get_functional
from reproduction.many_to_one import exact_dyadic_value, thinned_tree_sums, walk_side_values
from spine_sim.barriers import BarrierSpec
from spine_sim.estimators import BarrierMode, first_moment_proxy, forward_barrier_hits
from spine_sim.spine import sample_spines
from stable_walk.ballot import BallotKind, ballot_curve
from stable_walk.tail_index import fit_tail_index
from .estimators import fit_linear_slope, fit_loglog_slope, intervals_overlap
from .preset_base import (Preset, Summary, moment_row, pooled_moments, proportion_point,
                          slope_verdict)
from .results import VerdictRow

TOY_LEAF_ORACLE = (9.0 - 4.0 * math.sqrt(3.0)) / 4.0


class BallotScalingPreset(Preset):
    """Polynomial decay of staying above -a: exponents -1/alpha and -(1 - 1/alpha)"""

    id = "ballot-scaling"
    aliases = ("lemma21",)
    description = "ballot exponents of the associated walk over n = 2^j"
    columns = ["kind", "n", "hits", "walks"]
    kinds = (BallotKind.STAY_ABOVE, BallotKind.REFLECTED_STAY_ABOVE)

    def validate(self) -> None:
        self.require_stable_tail()
        if len(self.config.schedule) < 3:
            raise ConfigError("ballot-scaling needs at least 3 horizons")

    def estimate_cost(self) -> float:
        walks = int(self.param("walks_per_replica"))
        return float(self.config.replicas * walks * max(self.config.schedule) * len(self.kinds))

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        rng = stream.generator()
        walks = int(self.param("walks_per_replica"))
        params = {"a": float(self.param("a", 1.0))}
        rows = []
        for kind in self.kinds:
            for est in ballot_curve(self.law.base, kind, params, self.config.schedule, walks, rng):
                rows.append({"kind": kind.value, "n": est.n, "hits": est.successes, "walks": est.reps})
        return rows

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        totals = raw.groupby(["kind", "n"], sort=True)[["hits", "walks"]].sum().reset_index()
        for rec in totals.to_dict("records"):
            point = {"kind": rec["kind"], "n": int(rec["n"])}
            point.update(proportion_point(rec["hits"], rec["walks"]))
            summary.points.append(point)
        for kind in sorted(totals["kind"].unique()):
            pts = [(p["n"], p["estimate"]) for p in summary.points
                   if p["kind"] == kind and p["hits"] > 0]
            if len(pts) >= 3:
                summary.add_fit(kind, fit_loglog_slope(pts))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        tol = self.config.tolerance("ballot_slope")
        return [slope_verdict(f"{kind.value}_slope", summary.fits, kind.value,
                              kind.exponent(self.alpha), tol)
                for kind in self.kinds]


class BarrierEventPreset(Preset):
    """Decay in lambda of the barrier event (first-moment proxy or forward trees)"""

    id = "barrier-event"
    aliases = ("lemma32",)
    description = "first-moment proxy slope -1 in lambda; forward estimates monotone in lambda"
    columns = ["mode", "n", "lam", "sum", "sum_sq", "count"]

    @property
    def mode(self) -> BarrierMode:
        try:
            return BarrierMode(self.param("mode", "first_moment"))
        except ValueError:
            raise ConfigError(f"unknown barrier mode '{self.params.get('mode')}'")

    def spec(self, n: int) -> BarrierSpec:
        return BarrierSpec(n, 0.0, self.alpha, float(self.config.barrier.get("K", 5.0)),
                           float(self.config.barrier.get("c_prime", 10.0)))

    def validate(self) -> None:
        self.require_stable_tail()
        lambdas = self.config.lambdas
        if len(lambdas) < 3 or min(lambdas) < 0:
            raise ConfigError("barrier-event needs at least 3 lambdas >= 0")
        if self.mode is BarrierMode.FIRST_MOMENT and int(self.param("walks_per_replica")) < 2:
            raise ConfigError("barrier-event needs walks_per_replica >= 2")
        if self.mode is BarrierMode.FORWARD:
            max_n = int(self.config.barrier.get("forward_max_n", 256))
            for n in self.config.schedule:
                if n > max_n:
                    raise ConfigError(f"forward barrier estimation is limited to n <= {max_n}")
                spec = self.spec(n)
                if max(lambdas) > spec.max_lambda:
                    raise DomainError(f"lambda={max(lambdas)} outside [0, {spec.max_lambda:.4f}] "
                                      f"for n={n}")

    def estimate_cost(self) -> float:
        horizon = sum(self.spec(n).k_max for n in self.config.schedule)
        if self.mode is BarrierMode.FORWARD:
            return float(self.config.replicas * horizon * self.policy().max_population)
        return float(self.config.replicas * int(self.param("walks_per_replica")) * horizon)

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        lambdas = self.config.lambdas
        rows = []
        if self.mode is BarrierMode.FORWARD:
            for n in self.config.schedule:
                hits = forward_barrier_hits(self.law, self.spec(n), lambdas, stream.master_seed,
                                            stream.replica_index, self.policy())
                for lam, hit in zip(lambdas, hits):
                    rows.append({"mode": "forward", "n": n, "lam": lam, **moment_row([float(hit)])})
            return rows

        rng = stream.generator()
        walks = int(self.param("walks_per_replica"))
        for n in self.config.schedule:
            for est in first_moment_proxy(self.law, self.spec(n), lambdas, walks, rng):
                # sums recovered from the sample mean and standard error
                var = est.stderr ** 2 * est.reps
                rows.append({"mode": "first_moment", "n": n, "lam": est.lam,
                             "sum": est.estimate * est.reps,
                             "sum_sq": (est.reps - 1) * var + est.reps * est.estimate ** 2,
                             "count": est.reps})
        return rows

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        pooled = pooled_moments(raw, ["mode", "n", "lam"])
        summary.points = pooled.to_dict("records")
        for n in sorted(pooled["n"].unique()):
            sub = pooled[(pooled["n"] == n) & (pooled["mean"] > 0)]
            if len(sub) >= 3:
                summary.add_fit(f"n{int(n)}", fit_linear_slope(sub["lam"], np.log(sub["mean"])))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        rows = []
        if self.mode is BarrierMode.FIRST_MOMENT:
            tol = self.config.tolerance("barrier_slope")
            for n in self.config.schedule:
                rows.append(slope_verdict(f"proxy_slope_n{n}", summary.fits, f"n{n}", -1.0, tol,
                                          "log E[count] against lambda"))
            return rows

        z = self.config.tolerance("z_score")
        for n in self.config.schedule:
            pts = sorted((p for p in summary.points if p["n"] == n), key=lambda p: p["lam"])
            worst = max((b["mean"] - a["mean"] - z * math.hypot(a["stderr"], b["stderr"])
                         for a, b in zip(pts, pts[1:])), default=0.0)
            rows.append(VerdictRow.judged(f"forward_monotone_n{n}", worst, 0.0, None, worst <= 0.0,
                                          "largest increase beyond z stderr; truncation-biased"))
        return rows


class CheckConditionsPreset(Preset):
    """Boundary, tail, moment and step-law conditions of the reproduction law"""

    id = "check-conditions"
    description = "E[sum e^-V] = 1, E[sum V e^-V] = 0, tail exponent, moments and the step law"
    columns = ["quantity", "sum", "sum_sq", "count"]

    def validate(self) -> None:
        grid = [float(y) for y in self.param("y_grid")]
        if len(grid) < 3 or min(grid) <= 0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("y_grid must hold at least 3 increasing positive levels")

    def estimate_cost(self) -> float:
        return float(self.config.replicas * 2 * int(self.param("broods_per_replica")))

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        reps = int(self.param("broods_per_replica"))
        rng = stream.generator()
        batch = self.law.sample_broods(reps, rng)
        columns = brood_columns(self.law, batch, reps, self.param("y_grid"))
        rows = [{"quantity": name, **moment_row(values)} for name, values in columns.items()]

        if self.law.satisfies_stable_tail:
            positive = batch.displacement[batch.displacement > 0]
            k = hill_order(positive.size)
            if k >= 10:
                hill = fit_tail_index(positive, k)
                rows.append({"quantity": "hill_alpha", **moment_row([hill.alpha_hat])})

        statistic, pvalue = step_law_ks(self.law, self.law.walk_increments(reps, rng))
        rows.append({"quantity": "step_ks_distance", **moment_row([statistic])})
        rows.append({"quantity": "step_ks_pvalue", **moment_row([pvalue])})
        return rows

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        pooled = pooled_moments(raw, ["quantity"])
        summary.points = pooled.to_dict("records")

        # the moment rows are also pooled over the first half of the replicas
        replicas = sorted(raw["replica"].unique())
        if len(replicas) >= 2:
            first = raw[raw["replica"].isin(replicas[:len(replicas) // 2])
                        & raw["quantity"].isin(list(MOMENT_ROWS))]
            half = pooled_moments(first, ["quantity"])
            half["quantity"] = half["quantity"] + "_first_half"
            summary.points.extend(half.to_dict("records"))

        pvalues = raw.loc[raw["quantity"] == "step_ks_pvalue", "sum"].to_numpy(dtype=float)
        if pvalues.size:
            combined = float(stats.combine_pvalues(pvalues, method="fisher")[1])
            summary.points.append({"quantity": "step_ks_combined_pvalue", "count": int(pvalues.size),
                                   "mean": combined, "stderr": 0.0, "low": combined, "high": combined})

        tail = sorted((float(p["quantity"][5:]), p["mean"]) for p in summary.points
                      if p["quantity"].startswith("tail_"))
        if len(tail) >= 3 and all(m > 0 for _, m in tail):
            summary.add_fit("tail", fit_loglog_slope(tail))
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        z = self.config.tolerance("z_score")
        by_name = {p["quantity"]: p for p in summary.points}

        def near(check: str, name: str, target: float, note: str = "") -> VerdictRow:
            p = by_name[name]
            tol = z * p["stderr"]
            return VerdictRow.judged(check, p["mean"], target, tol,
                                     abs(p["mean"] - target) <= tol + 1e-12, note)

        rows = [near("boundary_weight", "weight", 1.0), near("boundary_derivative", "derivative", 0.0)]
        if self.law.satisfies_stable_tail:
            rows.append(slope_verdict("tail_slope", summary.fits, "tail", -self.alpha,
                                      self.config.tolerance("tail_slope")))
            if "hill_alpha" in by_name:
                hill = by_name["hill_alpha"]["mean"]
                tol = self.config.tolerance("hill")
                rows.append(VerdictRow.judged("tail_index_hill", hill, self.alpha, tol,
                                              abs(hill - self.alpha) <= tol,
                                              "mean of per-replica Hill estimates"))
            else:
                rows.append(VerdictRow.judged("tail_index_hill", float("nan"), self.alpha, None,
                                              False, "too few positive displacements"))
        else:
            value = summary.fits.get("tail", {}).get("slope", float("nan"))
            rows.append(VerdictRow.report("tail_slope", value,
                                          "law violates the stable tail condition by design"))

        rows.append(near("left_tail", "left_tail", 0.0, f"level -{left_tail_level(self.law):.3g}"))

        for name in MOMENT_ROWS:
            full = by_name[name]
            half = by_name.get(f"{name}_first_half", full)
            passed = moment_passes(name, full["mean"], half["mean"], half["stderr"])
            rows.append(VerdictRow.judged(name, full["mean"], None, None, passed,
                                          f"first-half replicas {half['mean']:.4g}"))

        for label, _, _, exact in self.law.intensity_targets():
            rows.append(near(f"intensity_{label}", f"intensity_{label}", exact))

        threshold = self.config.tolerance("ks_pvalue")
        ks = by_name["step_ks_combined_pvalue"]["mean"]
        rows.append(VerdictRow.judged("step_law_ks", ks, threshold, None, ks > threshold,
                                      f"Fisher-combined one-sample KS p-values, mean D = "
                                      f"{by_name['step_ks_distance']['mean']:.4g}"))
        return rows


class MtoOraclePreset(Preset):
    """Tree side against walk side of the many-to-one identity for every catalog functional"""

    id = "mto-oracle"
    description = "many-to-one identity: tree and walk confidence intervals overlap"
    columns = ["n", "functional", "side", "sum", "sum_sq", "count"]

    def validate(self) -> None:
        max_n = int(self.config.many_to_one.get("max_tree_n", 10))
        if max(self.config.schedule) > max_n:
            raise ConfigError(f"tree-side evaluation needs n <= {max_n}")
        if int(self.param("trees_per_replica")) < 1 or int(self.param("walks_per_replica")) < 1:
            raise ConfigError("trees_per_replica and walks_per_replica must be >= 1")

    @property
    def representatives(self) -> int:
        return int(self.config.many_to_one.get("representatives", 4))

    def estimate_cost(self) -> float:
        trees = int(self.param("trees_per_replica"))
        walks = int(self.param("walks_per_replica"))
        per = sum(trees * float(self.representatives) ** n + walks * n for n in self.config.schedule)
        return float(self.config.replicas * per * len(catalog_names()))

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        rng = stream.generator()
        a, b = float(self.param("a", 1.0)), float(self.param("b", 0.0))
        trees = int(self.param("trees_per_replica"))
        walks = int(self.param("walks_per_replica"))
        rows = []
        for n in self.config.schedule:
            for name in catalog_names():
                functional = get_functional(name)
                tree = thinned_tree_sums(self.law, n, trees, rng, functional, a, b, self.representatives)
                walk = walk_side_values(self.law, n, walks, rng, functional, a, b)
                rows.append({"n": n, "functional": name, "side": "tree", **moment_row(tree)})
                rows.append({"n": n, "functional": name, "side": "walk", **moment_row(walk)})
        return rows

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        summary.points = pooled_moments(raw, ["n", "functional", "side"]).to_dict("records")
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        rows = []
        z = self.config.tolerance("z_score")
        a, b = float(self.param("a", 1.0)), float(self.param("b", 0.0))
        pairs: Dict[tuple, Dict[str, Dict[str, Any]]] = {}
        for p in summary.points:
            pairs.setdefault((int(p["n"]), p["functional"]), {})[p["side"]] = p
        for (n, name), sides in sorted(pairs.items()):
            tree, walk = sides["tree"], sides["walk"]
            if tree["stderr"] == 0.0 and walk["stderr"] == 0.0:
                ok = abs(tree["mean"] - walk["mean"]) <= 1e-12
            else:
                ok = intervals_overlap((tree["low"], tree["high"]), (walk["low"], walk["high"]))
            rows.append(VerdictRow.judged(f"{name}_n{n}", tree["mean"] - walk["mean"], 0.0, None, ok,
                                          "tree minus walk; 95% intervals overlap"))
            if isinstance(self.law, DyadicToyLaw):
                exact = exact_dyadic_value(self.law, get_functional(name), n, a, b)
                if exact is not None:
                    tol = z * tree["stderr"]
                    rows.append(VerdictRow.judged(f"{name}_n{n}_exact", tree["mean"], exact, tol,
                                                  abs(tree["mean"] - exact) <= tol + 1e-12))
        if isinstance(self.law, DyadicToyLaw):
            exact = exact_dyadic_value(self.law, get_functional("leaf_nonpositive"), 2)
            rows.append(VerdictRow.judged("leaf_nonpositive_n2_closed_form", exact, TOY_LEAF_ORACLE,
                                          1e-12, abs(exact - TOY_LEAF_ORACLE) <= 1e-12,
                                          "exact enumeration against (9 - 4 sqrt 3) / 4"))
        return rows


class SpineMarginalPreset(Preset):
    """Spine increments against direct draws of the associated walk step"""

    id = "spine-marginal"
    description = "spine increments have the law of the associated walk step (two-sample KS)"
    columns = ["source", "value"]

    @property
    def bins(self) -> int:
        return int(self.param("bins", 50))

    def validate(self) -> None:
        if int(self.param("n")) < 1 or int(self.param("steps_per_replica")) < 1:
            raise ConfigError("spine-marginal needs n >= 1 and steps_per_replica >= 1")
        if self.bins < 2:
            raise ConfigError("spine-marginal needs at least 2 bins")

    def estimate_cost(self) -> float:
        return float(self.config.replicas * 2 * int(self.param("steps_per_replica")))

    def _binned(self, steps: np.ndarray) -> np.ndarray:
        # equiprobable bins under the step law
        idx = np.floor(self.law.step_cdf(steps) * self.bins).astype(np.int64)
        return np.bincount(np.clip(idx, 0, self.bins - 1), minlength=self.bins)

    def run_replica(self, stream: ReplicaStream) -> List[Dict[str, Any]]:
        rng = stream.generator()
        n = int(self.param("n"))
        spines = max(1, math.ceil(int(self.param("steps_per_replica")) / n))
        spine_steps = np.diff(sample_spines(self.law, n, spines, rng).positions, axis=1).ravel()
        direct = self.law.walk_increments(spine_steps.size, rng)
        return ([{"source": "spine", "value": float(v)} for v in spine_steps]
                + [{"source": "direct", "value": float(v)} for v in direct])

    def summarize(self, raw: pd.DataFrame) -> Summary:
        summary = Summary()
        spine = raw.loc[raw["source"] == "spine", "value"].to_numpy(dtype=float)
        direct = raw.loc[raw["source"] == "direct", "value"].to_numpy(dtype=float)
        ks = stats.ks_2samp(spine, direct)

        counts = np.vstack([self._binned(spine), self._binned(direct)]).astype(float)
        counts = counts[:, counts.sum(axis=0) > 0]
        if counts.shape[1] >= 2:
            _, chi2_pvalue, _, _ = stats.chi2_contingency(counts)
        else:
            chi2_pvalue = 1.0

        summary.points = [{"quantity": "ks_statistic", "value": float(ks.statistic)},
                          {"quantity": "ks_pvalue", "value": float(ks.pvalue)},
                          {"quantity": "homogeneity_pvalue", "value": float(chi2_pvalue)},
                          {"quantity": "spine_steps", "value": float(spine.size)},
                          {"quantity": "direct_steps", "value": float(direct.size)}]
        return summary

    def judge(self, summary: Summary) -> List[VerdictRow]:
        by_name = {p["quantity"]: p["value"] for p in summary.points}
        threshold = self.config.tolerance("ks_pvalue")
        pvalue = by_name["ks_pvalue"]
        return [VerdictRow.judged("spine_step_ks", pvalue, threshold, None, pvalue > threshold,
                                  f"two-sample KS p-value, D = {by_name['ks_statistic']:.4g}"),
                VerdictRow.report("spine_step_homogeneity", by_name["homogeneity_pvalue"],
                                  "chi-square on equiprobable bins of the step law")]
