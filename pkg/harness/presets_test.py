"""
Tests for experiment presets on small configurations
"""

import math

import pandas as pd
import pytest
from scipy import stats

from core.config import ConfigManager
from core.errors import ConfigError, CostGuardError, DomainError
from .experiment_config import ExperimentConfig
from .presets import PRESETS, canonical_preset_id, create_preset, get_preset_class, preset_ids
from .results import frame_to_csv
from .walk_presets import TOY_LEAF_ORACLE

BROOD = {"family": "brood", "alpha": 1.5, "x_m": 1.0, "d": 2.0}
TOY = {"family": "dyadic"}
BROOD_CONDITION_CHECKS = {
    "boundary_weight", "boundary_derivative", "tail_slope", "tail_index_hill", "left_tail",
    "moment_x", "moment_x_tilde", "intensity_left_part", "intensity_left_half",
    "intensity_pareto_2_4", "intensity_pareto_tail_10", "step_law_ks"}
SMALL = {"ceiling_scale": 3.0, "max_population": 2000, "chunk_size": 65536}


def make_config(preset, law=None, replicas=2, **params):
    merged = ConfigManager().section(f"presets.{preset}")
    merged.update(params)
    return ExperimentConfig(preset=preset, law=dict(law or BROOD), replicas=replicas,
                            master_seed=11, truncation=dict(SMALL), params=merged)


def run_all(preset):
    return pd.concat([preset.replica_frame(r) for r in range(preset.config.replicas)],
                     ignore_index=True)


def statuses(rows):
    return {row.check: row.status for row in rows}


def test_registry():
    assert preset_ids() == [
        "ballot-scaling", "barrier-event", "minimum-tail", "wn-decay", "integral-test",
        "lower-envelope", "median-mn", "wn-max", "check-conditions", "mto-oracle", "spine-marginal"]
    assert all(cls.description for cls in PRESETS.values())
    with pytest.raises(ConfigError):
        get_preset_class("no-such-preset")


@pytest.mark.parametrize("alias, preset_id", [
    ("lemma21", "ballot-scaling"),
    ("lemma32", "barrier-event"),
    ("lemma41", "minimum-tail"),
])
def test_alias_ids_resolve(alias, preset_id):
    assert canonical_preset_id(alias) == preset_id
    assert get_preset_class(alias) is PRESETS[preset_id]
    assert alias in PRESETS[preset_id].aliases
    assert alias not in preset_ids()


def test_every_default_preset_builds():
    for preset_id in preset_ids():
        preset = create_preset(ExperimentConfig.from_manager(ConfigManager(), preset_id))
        assert preset.estimate_cost() > 0


def test_ballot_scaling_rows_and_fits():
    preset = create_preset(make_config("ballot-scaling", replicas=1, j_min=3, j_max=6,
                                       walks_per_replica=4000))
    raw = run_all(preset)
    assert list(raw.columns) == ["replica", "seed", "kind", "n", "hits", "walks"]
    assert len(raw) == 8
    summary, verdict = preset.evaluate(raw)
    assert set(summary.fits) == {"stay_above", "reflected_stay_above"}
    assert summary.fits["stay_above"]["slope"] < 0
    assert set(statuses(verdict)) == {"stay_above_slope", "reflected_stay_above_slope"}


def test_ballot_scaling_needs_a_stable_law():
    with pytest.raises(ConfigError):
        create_preset(make_config("ballot-scaling", law=TOY))


def test_cost_guard_refuses_before_running():
    config = make_config("ballot-scaling")
    config.budget = 10.0
    with pytest.raises(CostGuardError) as err:
        create_preset(config).check_budget()
    assert err.value.estimate > err.value.budget == 10.0


def test_barrier_event_first_moment():
    preset = create_preset(make_config("barrier-event", replicas=2, ns=[16, 32],
                                       lambdas=[0.0, 0.5, 1.0], walks_per_replica=400))
    raw = run_all(preset)
    assert len(raw) == 2 * 2 * 3
    summary, verdict = preset.evaluate(raw)
    assert all(p["count"] == 800 for p in summary.points)
    assert set(statuses(verdict)) == {"proxy_slope_n16", "proxy_slope_n32"}


def test_barrier_event_forward_mode():
    preset = create_preset(make_config("barrier-event", replicas=3, mode="forward", ns=[8],
                                       lambdas=[0.0, 0.2, 0.4]))
    raw = run_all(preset)
    assert set(raw["sum"].unique()) <= {0.0, 1.0}
    _, verdict = preset.evaluate(raw)
    assert list(statuses(verdict)) == ["forward_monotone_n8"]


def test_barrier_event_forward_guards():
    with pytest.raises(ConfigError):
        create_preset(make_config("barrier-event", mode="forward", ns=[512], lambdas=[0.0, 0.1, 0.2]))
    with pytest.raises(DomainError):
        create_preset(make_config("barrier-event", mode="forward", ns=[8], lambdas=[0.0, 0.5, 2.0]))
    with pytest.raises(ConfigError):
        create_preset(make_config("barrier-event", mode="importance"))


def test_check_conditions_rows():
    preset = create_preset(make_config("check-conditions", broods_per_replica=3000))
    summary, verdict = preset.evaluate(run_all(preset))
    names = {p["quantity"] for p in summary.points}
    assert {"weight", "derivative", "tail_2", "tail_32", "left_tail", "moment_x",
            "moment_x_first_half", "step_ks_pvalue", "step_ks_combined_pvalue"} <= names
    status = statuses(verdict)
    assert set(status) == BROOD_CONDITION_CHECKS
    assert all(s in ("pass", "fail") for s in status.values())
    assert status["left_tail"] == "pass"
    by_check = {row.check: row for row in verdict}
    assert by_check["tail_index_hill"].target == 1.5
    assert 0.0 <= by_check["step_law_ks"].value <= 1.0


def test_check_conditions_judges_a_wrong_step_law():
    preset = create_preset(make_config("check-conditions", broods_per_replica=3000))
    raw = run_all(preset)
    raw.loc[raw["quantity"] == "step_ks_pvalue", ["sum", "sum_sq"]] = 1e-9
    _, verdict = preset.evaluate(raw)
    assert statuses(verdict)["step_law_ks"] == "fail"


def test_check_conditions_toy_reports_tail():
    preset = create_preset(make_config("check-conditions", law=TOY, broods_per_replica=3000))
    _, verdict = preset.evaluate(run_all(preset))
    status = statuses(verdict)
    assert status["tail_slope"] == "report"
    assert "tail_index_hill" not in status
    assert status["boundary_weight"] in ("pass", "fail")
    assert {"left_tail", "moment_x", "intensity_minus_u", "step_law_ks"} <= set(status)


def test_mto_oracle_on_the_toy():
    preset = create_preset(make_config("mto-oracle", law=TOY, replicas=2, ns=[2],
                                       trees_per_replica=3000, walks_per_replica=3000))
    summary, verdict = preset.evaluate(run_all(preset))
    by_check = {row.check: row for row in verdict}
    oracle = by_check["leaf_nonpositive_n2_closed_form"]
    assert oracle.status == "pass"
    assert oracle.value == pytest.approx(TOY_LEAF_ORACLE, abs=1e-12)
    assert "leaf_nonpositive_n2_exact" in by_check
    assert {"unit_weight_n2", "unit_weight_n2_exact"} <= set(by_check)


def test_mto_oracle_rejects_deep_trees():
    with pytest.raises(ConfigError):
        create_preset(make_config("mto-oracle", ns=[4, 16]))


def test_spine_marginal_two_sample_ks():
    preset = create_preset(make_config("spine-marginal", replicas=2, n=16, steps_per_replica=3200))
    raw = run_all(preset)
    assert set(raw["source"]) == {"spine", "direct"}
    summary, verdict = preset.evaluate(raw)
    values = {p["quantity"]: p["value"] for p in summary.points}
    assert values["spine_steps"] == values["direct_steps"] == 6400
    expected = stats.ks_2samp(raw.loc[raw["source"] == "spine", "value"],
                              raw.loc[raw["source"] == "direct", "value"])
    assert values["ks_pvalue"] == pytest.approx(expected.pvalue)
    assert values["ks_statistic"] == pytest.approx(expected.statistic)
    assert 0.0 <= values["homogeneity_pvalue"] <= 1.0
    status = statuses(verdict)
    assert list(status) == ["spine_step_ks", "spine_step_homogeneity"]
    assert status["spine_step_homogeneity"] == "report"


def test_spine_marginal_ks_rejects_shifted_increments():
    preset = create_preset(make_config("spine-marginal", replicas=2, n=16, steps_per_replica=3200))
    raw = run_all(preset)
    shifted = raw.copy()
    shifted.loc[shifted["source"] == "spine", "value"] += 0.5
    summary, verdict = preset.evaluate(shifted)
    assert statuses(verdict)["spine_step_ks"] == "fail"
    assert {p["quantity"]: p["value"] for p in summary.points}["ks_pvalue"] < 1e-6


def test_minimum_tail_conditions_on_survival():
    preset = create_preset(make_config("minimum-tail", replicas=4, n=16, lambdas=[0.0, 1.0, 2.0]))
    raw = run_all(preset)
    assert (raw["n"] == 16).all()
    assert raw["M_n"].map(math.isfinite).all()
    summary, verdict = preset.evaluate(raw)
    rate = [p for p in summary.points if p["quantity"] == "survival_rate"][0]
    assert 0.0 < rate["value"] <= 1.0
    assert list(statuses(verdict)) == ["minimum_tail_slope"]


def test_toy_schedule_presets_report_only():
    for preset_id in ("wn-decay", "median-mn"):
        preset = create_preset(make_config(preset_id, law=TOY, replicas=3, j_min=1, j_max=3))
        raw = run_all(preset)
        assert sorted(raw["n"].unique().tolist()) == [2, 4, 8]
        assert (raw["attempt"] == 0).all()
        _, verdict = preset.evaluate(raw)
        assert [row.status for row in verdict] == ["report"]


def test_qualitative_presets_never_judge():
    for preset_id in ("lower-envelope", "integral-test"):
        preset = create_preset(make_config(preset_id, replicas=2, j_min=2, j_max=4))
        assert preset.qualitative
        _, verdict = preset.evaluate(run_all(preset))
        assert verdict and all(row.status == "report" for row in verdict)
        assert all("qualitative" in row.note for row in verdict)


def test_wn_max():
    preset = create_preset(make_config("wn-max", replicas=6, n=4, m=8, lambdas=[0.5, 1.0, 2.0]))
    raw = run_all(preset)
    assert (raw["value"] >= 0).all()
    summary, verdict = preset.evaluate(raw)
    assert [p["lam"] for p in summary.points] == [0.5, 1.0, 2.0]
    assert statuses(verdict)["nonincreasing_in_lambda"] == "pass"
    with pytest.raises(ConfigError):
        create_preset(make_config("wn-max", n=8, m=4))


def wn_max_raw(values):
    return pd.DataFrame({"replica": range(len(values)), "seed": [str(i) for i in range(len(values))],
                         "value": [float(v) for v in values]})


def test_wn_max_rising_tail_fails():
    preset = create_preset(make_config("wn-max", n=4, m=8, lambdas=[0.5, 1.0, 2.0]))
    # the lambda=0.5 subset never exceeds, the lambda=1 subset always does
    raw = wn_max_raw([0 if r % 3 == 0 else 100 for r in range(60)])
    _, verdict = preset.evaluate(raw)
    assert statuses(verdict)["nonincreasing_in_lambda"] == "fail"


def test_wn_max_held_out_replicas_above_fitted_constant_fail():
    preset = create_preset(make_config("wn-max", n=4, m=8, lambdas=[0.5, 1.0, 2.0]))
    raw = wn_max_raw([0 if r % 2 == 0 else 100 for r in range(60)])
    summary, verdict = preset.evaluate(raw)
    assert summary.fits["constant"]["slope"] == 0.0
    rows = {row.check: row for row in verdict}
    assert rows["below_fitted_shape"].status == "fail"
    assert rows["nonincreasing_in_lambda"].status == "pass"


def test_wn_max_decay_against_shape():
    preset = create_preset(make_config("wn-max", n=4, m=8, lambdas=[2.0, 4.0, 8.0]))
    flat = wn_max_raw([100 if r % 4 == 0 else 0 for r in range(64)])
    summary, verdict = preset.evaluate(flat)
    row = {row.check: row for row in verdict}["decay_not_slower_than_shape"]
    assert row.status == "fail"
    assert row.value == pytest.approx(0.0, abs=1e-12)
    assert row.target == pytest.approx(summary.fits["shape"]["slope"])
    assert -0.5 < row.target < -0.3

    # P = 1/2, 1/8, 1/32: slope -2
    fast = wn_max_raw([3] * 24 + [6] * 6 + [10] * 2 + [0] * 32)
    summary, verdict = preset.evaluate(fast)
    assert summary.fits["decay"]["slope"] == pytest.approx(-2.0)
    assert statuses(verdict)["decay_not_slower_than_shape"] == "pass"


def test_wn_max_saturated_tail_is_reported():
    preset = create_preset(make_config("wn-max", n=4, m=8, lambdas=[0.5, 1.0, 2.0]))
    _, verdict = preset.evaluate(wn_max_raw([100] * 12))
    assert statuses(verdict)["decay_not_slower_than_shape"] == "report"


def test_summaries_depend_only_on_the_raw_table(tmp_path):
    preset = create_preset(make_config("barrier-event", replicas=2, ns=[16],
                                       lambdas=[0.0, 0.5, 1.0], walks_per_replica=300))
    raw = run_all(preset)
    path = tmp_path / "raw.csv"
    path.write_text(frame_to_csv(raw))
    reread = pd.read_csv(path, dtype={"seed": str})
    first, second = preset.evaluate(raw), preset.evaluate(reread)
    assert first[0] == second[0]
    assert first[1] == second[1]


def test_same_replica_same_rows():
    preset = create_preset(make_config("spine-marginal", n=8, steps_per_replica=500))
    assert preset.replica_frame(1).equals(preset.replica_frame(1))
    assert not preset.replica_frame(0).equals(preset.replica_frame(1))
