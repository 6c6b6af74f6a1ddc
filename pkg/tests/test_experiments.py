"""
Tests for settings, the replication harness, the pipeline and the studies

Tests marked slow reproduce the simulation studies at desk scale; run them
with --runslow.
"""
import numpy as np
import pytest

from experiments import (
    bootstrap_se,
    compare_stopping_rules,
    get_setting,
    init_sweep,
    l1_path_study,
    load_setting,
    make_replication,
    null_space_dataset,
    null_space_example,
    parse_setting,
    run_setting,
    saturation_study,
    screened_pipeline,
    signal_trajectories,
    stage_dynamics_probe,
    stage_problem,
    weak_signal_study,
)
from experiments.harness import summarize
from experiments.studies import StageReport, SweepCurve
from design.dataset import GroundTruth
from selection import score_selection, select_support, threshold_window
from solver.hadamard_gd import HyperParams, run
from stopping import holdout_stop
from storage.models import MetricsRow
from utils.errors import ConfigurationError, ExperimentFailedError
from utils.helpers import relative_error


def tiny_setting(**changes):
    fields = {"name": "tiny", "n": 40, "p": 30, "replications": 3, "t_max": 300}
    fields.update(changes)
    return parse_setting(fields)


class TestSettings:
    def test_named_setting(self):
        spec = get_setting("S4")
        assert (spec.n, spec.p, spec.total_samples) == (200, 500, 600)
        assert spec.covariance.kind == "toeplitz" and spec.covariance.rho == 0.5
        truth = spec.build_truth()
        assert truth.support == (0, 1, 2, 3)
        assert truth.sigma == pytest.approx(0.15 * np.sqrt(18.0))

    def test_sigma_override_is_absolute(self):
        assert get_setting("S1", sigma=0.1).build_truth().sigma == 0.1

    def test_weak_signal_setting(self):
        truth = get_setting("W").build_truth()
        unit = np.sqrt(np.log(500) / 200)
        assert truth.weak_support == (0, 1, 2, 3)
        assert len(truth.strong_support) == 16
        assert truth.beta_star[0] == pytest.approx(0.5 * unit)
        assert truth.beta_star[4] == pytest.approx(5.0 * unit)

    @pytest.mark.parametrize("name, overrides", [
        ("S9", {}),
        ("S1", {"n": 0}),
        ("S1", {"split": (0.5, 0.5, 0.5)}),
        ("S1", {"p": 3}),
        ("S1", {"init_mode": "random"}),
        ("S1", {"colour": "red"}),
    ])
    def test_invalid(self, name, overrides):
        with pytest.raises(ConfigurationError):
            get_setting(name, **overrides)

    def test_strong_weak_needs_absolute_sigma(self):
        with pytest.raises(ConfigurationError):
            parse_setting({"name": "x", "n": 10, "p": 10,
                           "beta_star_spec": {"kind": "strong_weak", "s1": 1, "s2": 1,
                                              "strong_level": 5, "weak_level": 0.5}})

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "setting.json"
        spec = tiny_setting()
        path.write_text(spec.model_dump_json())
        assert load_setting(str(path)).model_dump() == spec.model_dump()


class TestReplication:
    def test_split_and_determinism(self):
        spec = tiny_setting()
        first, second = make_replication(spec, 1, 7), make_replication(spec, 1, 7)
        assert (first.train.n, first.valid.n, first.test.n, first.pooled.n) == (40, 40, 40, 80)
        assert np.array_equal(first.full.X, second.full.X)
        assert np.array_equal(first.full.y, second.full.y)
        other = make_replication(spec, 2, 7)
        assert not np.array_equal(first.full.X, other.full.X)

    def test_normalized_replication(self):
        rep = make_replication(tiny_setting(normalize=True), 0, 0)
        assert np.allclose(np.linalg.norm(rep.full.X, axis=0), np.sqrt(rep.full.n))


class TestBootstrap:
    @pytest.mark.parametrize("values", [[], [1.0], [2.0, 2.0, 2.0]])
    def test_degenerate_inputs(self, values):
        assert bootstrap_se(values) == 0.0

    def test_positive_and_seeded(self):
        values = np.arange(20, dtype=float)
        assert bootstrap_se(values, seed=1) > 0
        assert bootstrap_se(values, seed=1) == bootstrap_se(values, seed=1)

    def test_failure_cap(self):
        rows = [MetricsRow(method="m", replication=i, std_est_error=0.1, mean_pred_error=1.0) for i in range(19)]
        rows.append(MetricsRow(method="m", replication=19, error="DivergenceError: boom"))
        summary = summarize("m", rows, resamples=50, seed=0)
        assert summary.failed == 1 and summary.succeeded == 19
        with pytest.raises(ExperimentFailedError):
            summarize("m", rows[:5] + [MetricsRow(method="m", error="x")] * 2, resamples=50, seed=0)


class TestRunSetting:
    def test_rows_and_summary(self):
        table, rows = run_setting(tiny_setting(), ["gd_oracle", "gd_holdout"], master_seed=3, resamples=50)
        assert [(row.replication, row.method) for row in rows] == [
            (i, m) for i in range(3) for m in ("gd_oracle", "gd_holdout")]
        assert table.get("gd_oracle").succeeded == 3
        assert table.get("gd_holdout").median_std_est_error >= 0
        assert table.replications == 3

    def test_reproducible_across_workers(self):
        spec = tiny_setting()
        serial, _ = run_setting(spec, ["gd_oracle", "lasso_cv"], master_seed=5, resamples=50)
        threaded, _ = run_setting(spec, ["gd_oracle", "lasso_cv"], master_seed=5, workers=3, resamples=50)
        assert serial.to_dict() == threaded.to_dict()

    def test_oracle_never_loses_to_holdout(self):
        _, rows = run_setting(tiny_setting(), ["gd_oracle", "gd_holdout"], master_seed=1, resamples=50)
        for i in range(3):
            oracle, holdout = rows[2 * i], rows[2 * i + 1]
            assert oracle.std_est_error <= holdout.std_est_error + 1e-12

    def test_sure_in_first_rise_mode(self):
        spec = tiny_setting(replications=5)
        assert spec.stop_mode == "first_rise"
        table, rows = run_setting(spec, ["gd_sure"], master_seed=0, resamples=50)
        assert table.get("gd_sure").succeeded == 5
        assert all(row.error is None and row.stopped_at is not None for row in rows)

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError):
            run_setting(tiny_setting(), ["gd_magic"])


class TestPipeline:
    def test_screened(self, small_problem):
        _, ds = small_problem
        result = screened_pipeline(ds, keep=10, hp=HyperParams(t_max=400), k=3, seed=2)
        assert result.beta.shape == (ds.p,)
        assert set(result.selected) <= set(result.index_map.tolist())
        assert result.threshold == result.lasso.lam
        assert np.all((result.beta == 0) | (np.abs(result.beta) >= result.threshold))

    def test_without_screening(self, small_problem):
        _, ds = small_problem
        result = screened_pipeline(ds, keep=None, hp=HyperParams(t_max=200), k=3)
        assert np.array_equal(result.index_map, np.arange(ds.p))


class TestNullSpace:
    def test_converges_to_the_min_l1_point(self):
        rows = null_space_example([1e-3, 1e-5, 1e-10])
        for row in rows:
            assert np.max(np.abs(row.beta - np.array([0.0, 1.0, -1.0]))) <= 1e-2
            payload = row.to_dict()
            assert payload["one_minus_beta2"] == pytest.approx(payload["one_plus_beta3"], abs=1e-12)
        first = [abs(row.beta[0]) for row in rows]
        assert first[0] > first[1] > first[2]
        assert 5.703e-8 <= first[1] <= 5.703e-6

    def test_l1_norm_reaches_the_min_l1_value(self):
        ds = null_space_dataset()
        truth = GroundTruth.from_beta(np.array([0.0, 1.0, -1.0]), 0.0, 2)
        hp = HyperParams(alpha=1e-5, eta=0.2, t_max=20000, stop_tol=1e-12, init_mode="deterministic_theory")
        frame = l1_path_study(ds, truth, hp)
        assert list(frame.columns) == ["t", "l1_norm", "est_error"]
        assert frame["l1_norm"].iloc[-1] == pytest.approx(2.0, rel=0.05)
        assert frame["est_error"].iloc[-1] < 1e-2


class TestSweep:
    def test_error_shrinks_with_alpha(self):
        curve = init_sweep("independent", [1e-2, 1e-4], n=100, p=200, eta=0.05)
        assert all(np.isfinite(curve.errors))
        assert curve.errors[1] < curve.errors[0]
        assert curve.to_frame().shape == (2, 3)

    def test_unknown_design(self):
        with pytest.raises(ConfigurationError):
            init_sweep("banded", [1e-2])

    def test_slope(self):
        curve = SweepCurve("independent", [1e-1, 1e-2, 1e-3, 1e-4], [1e-1, 1e-2, float("nan"), 1e-4], [1, 1, 1, 1], 0.2)
        assert curve.slope == pytest.approx(1.0)

    def test_trajectories(self):
        frame = signal_trajectories("correlated", n=60, p=40, t_max=20)
        assert list(frame.columns) == ["t", "beta_0", "beta_1", "beta_2", "beta_3"]
        assert len(frame) == 21


class TestStages:
    def test_report_checks(self):
        report = StageReport(variant="general", eta=0.5, m=1.0, stage_one_end=10,
                             growth_factors=[1.2, 1.1], offsupport_max=0.01, contraction_factor=0.8)
        assert report.growth_holds()
        assert report.offsupport_holds(p=500)
        assert report.contraction_holds()
        assert not StageReport(variant="general", eta=0.5, m=1.0, stage_one_end=None).growth_holds()

    def test_probe_leaves_stage_one(self):
        truth, ds = stage_problem(seed=0)
        hp = HyperParams(init_mode="deterministic_theory", t_max=2000)
        report = stage_dynamics_probe(truth, ds, hp)
        assert report.stage_one_end is not None
        assert len(report.errors) == 2001
        assert report.offsupport_holds(ds.p)

    def test_invalid_probe(self):
        truth, ds = stage_problem(p=50, n=40)
        with pytest.raises(ConfigurationError):
            stage_dynamics_probe(truth, ds, HyperParams(t_max=5), variant="complex")
        empty = GroundTruth.from_beta(np.zeros(50), 0.0, 40)
        with pytest.raises(ConfigurationError):
            stage_dynamics_probe(empty, ds, HyperParams(t_max=5))


class TestSmallStudies:
    def test_saturation(self):
        result = saturation_study(tiny_setting(), grid_size=10)
        assert result.gd_best < 1.0
        assert result.lasso_best <= 1.0 + 1e-12
        assert set(result.gd_curve.columns) == {"t", "l1_norm", "std_est_error"}

    def test_weak_signal(self):
        spec = parse_setting({
            "name": "weak", "n": 60, "p": 40, "replications": 2, "t_max": 300,
            "beta_star_spec": {"kind": "strong_weak", "s1": 3, "s2": 1, "strong_level": 5, "weak_level": 0.5},
            "sigma_rule": {"kind": "absolute", "value": 1.0},
        })
        summary = weak_signal_study(setting=spec)
        assert len(summary.rows) == 4
        assert set(summary.medians()) == {"gd_hard_threshold", "lasso_cv"}
        assert summary.to_dict()["replications"] == 2


# =============================================================================
# DESK-SCALE REPRODUCTIONS
# =============================================================================

@pytest.mark.slow
def test_sweep_is_log_linear():
    curve = init_sweep("independent", [1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    assert all(np.diff(curve.errors) < 0)
    assert 0.5 <= curve.slope <= 1.5


@pytest.mark.slow
@pytest.mark.parametrize("variant", ["general", "nonneg"])
def test_stage_dynamics_on_most_seeds(variant):
    passed = 0
    for seed in range(20):
        truth, ds = stage_problem(variant, seed=seed)
        report = stage_dynamics_probe(truth, ds, HyperParams(init_mode="deterministic_theory", t_max=2000), variant)
        passed += report.growth_holds() and report.offsupport_holds(ds.p) and report.contraction_holds()
    assert passed >= 18


@pytest.mark.slow
def test_gd_beats_lasso_on_s1_to_s4():
    for name in ("S1", "S2", "S3", "S4"):
        table, _ = run_setting(get_setting(name), ["gd_holdout", "lasso_cv"], master_seed=0)
        assert table.get("gd_holdout").median_std_est_error < table.get("lasso_cv").median_std_est_error


@pytest.mark.slow
def test_noiseless_holdout_recovery():
    table, _ = run_setting(get_setting("S1", sigma=0.0, replications=5), ["gd_holdout"], master_seed=0)
    assert table.get("gd_holdout").median_std_est_error <= 1e-4


@pytest.mark.slow
def test_stopping_rules_side_by_side():
    for name, table in compare_stopping_rules().items():
        oracle = table.get("gd_oracle").median_std_est_error
        assert oracle <= table.get("gd_holdout").median_std_est_error
        assert table.get("gd_kfold").median_std_est_error <= 3 * oracle
        assert np.isfinite(table.get("gd_sure").median_std_est_error)


@pytest.mark.slow
def test_strong_signals_are_selected_across_the_window():
    stable = 0
    spec = get_setting("S1", sigma=0.5)
    for index in range(20):
        rep = make_replication(spec, index, 0)
        fit, _ = holdout_stop(rep.train, rep.valid, spec.hyper_params())
        window = threshold_window(fit, rep.train, sigma_hat=0.5)
        selected = window.stability["selected"]
        stable += all(probe == list(rep.truth.strong_support) for probe in selected.values())
    assert stable >= 18


@pytest.mark.slow
def test_weak_signals_stay_undetected():
    medians = weak_signal_study(replications=20).medians()["gd_hard_threshold"]
    assert medians["tn"] == 4
    assert medians["fp"] <= 2


@pytest.mark.slow
def test_selection_scores_match_the_truth_on_noiseless_data():
    rep = make_replication(get_setting("S1", sigma=0.0, replications=1), 0, 0)
    fit, _ = holdout_stop(rep.train, rep.valid, HyperParams(init_mode="deterministic_theory"))
    report = score_selection(select_support(fit.beta_hat, 0.1), rep.truth)
    assert report.false_positives == 0 and report.true_negatives_missed == 0
    assert relative_error(fit.beta_hat, rep.truth.beta_star) < 1e-3


@pytest.mark.slow
def test_holdout_beats_running_to_the_end_on_s2():
    spec = get_setting("S2")
    hp = spec.hyper_params()
    wins = 0
    for index in range(20):
        rep = make_replication(spec, index, 0)
        stopped, _ = holdout_stop(rep.train, rep.valid, hp, seed=index)
        last = run(rep.train, hp, seed=index)
        wins += relative_error(stopped.beta_hat, rep.truth.beta_star) < relative_error(last.beta_hat, rep.truth.beta_star)
    assert wins >= 16
