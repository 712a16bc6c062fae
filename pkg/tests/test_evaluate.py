"""Relative-L2 metric, test-split evaluation, gradient histograms."""

import numpy as np
import pytest

from flowpinn.datagen import DatasetSplit, FlowSamples, build_taylor_green_split
from flowpinn.errors import ConfigurationError, UndefinedMetricError
from flowpinn.evaluate import (
    evaluate,
    gradient_histograms,
    histograms_csv,
    relative_l2,
)
from flowpinn.network import Mlp, MlpConfig, init
from flowpinn.weighting import grad_abs_stats, instantaneous_lambda


def test_relative_l2_identity():
    assert relative_l2([1.0, 2.0], [1.0, 2.0]) == 0.0


def test_relative_l2_null_predictor():
    assert relative_l2([0.0, 0.0, 0.0], [1.0, -2.0, 2.0]) == 1.0


def test_relative_l2_direct():
    assert relative_l2([1.0, 2.0], [1.0, 1.0]) == pytest.approx(1 / np.sqrt(2), rel=1e-14)


def test_relative_l2_zero_norm_truth():
    with pytest.raises(UndefinedMetricError):
        relative_l2([1.0], [0.0])


def test_relative_l2_scale_covariant_in_difference():
    truth = np.array([1.0, 2.0, -1.0])
    d = np.array([0.3, -0.1, 0.2])
    base = relative_l2(truth + d, truth)
    for c in (0.5, 2.0, -3.0):
        assert relative_l2(truth + c * d, truth) == pytest.approx(abs(c) * base, rel=1e-12)


def _tg_setup(seed=0):
    split = build_taylor_green_split(
        re=100.0, n_sparse=6, grid_n=8, t0=0.0, t1=0.5,
        dt_train=0.25, dt_test=0.125, seed=seed,
    )
    config = MlpConfig(n_inputs=3, hidden_layers=1, neurons=6, n_outputs=3, seed=seed)
    return split, Mlp(config), init(config)


def test_evaluate_self_consistency():
    split, net, params = _tg_setup()
    # build a "truth" equal to the network's own outputs
    out = net.forward(params, split.test.points)
    own = FlowSamples(points=split.test.points, u=out[:, 0], v=out[:, 1], p=out[:, 2])
    self_split = DatasetSplit(train=split.train, test=own,
                              collocation=split.collocation, meta=split.meta)
    report = evaluate(params, net, self_split, "ns2d")
    for name in report.fields:
        assert report.aggregates[name] == 0.0


def test_evaluate_scaled_truth_formula():
    split, net, params = _tg_setup(1)
    report1 = evaluate(params, net, split, "ns2d")
    doubled = DatasetSplit(
        train=split.train,
        test=FlowSamples(points=split.test.points, u=2 * split.test.u,
                         v=split.test.v, p=split.test.p),
        collocation=split.collocation,
        meta=split.meta,
    )
    report2 = evaluate(params, net, doubled, "ns2d")
    # check ||pred - 2U|| / ||2U|| for one timestep by hand
    t0 = report2.times[0]
    idx = np.flatnonzero(split.test.times == t0)
    pred = net.forward(params, split.test.points[idx])[:, 0]
    truth = 2 * split.test.u[idx]
    expected = np.linalg.norm(pred - truth) / np.linalg.norm(truth)
    assert report2.per_step["u"][0] == pytest.approx(expected, rel=1e-12)


def test_evaluate_aggregate_is_mean_of_steps():
    split, net, params = _tg_setup(2)
    report = evaluate(params, net, split, "ns2d")
    for name in report.fields:
        assert report.aggregates[name] == pytest.approx(
            float(np.mean(report.per_step[name])), rel=1e-12, abs=1e-15
        )


def test_evaluate_pressure_alignment_never_touches_velocity():
    split, net, params = _tg_setup(3)
    report = evaluate(params, net, split, "ns2d")
    stripped = DatasetSplit(
        train=split.train, test=split.test.without_pressure(),
        collocation=split.collocation, meta=split.meta,
    )
    no_p = evaluate(params, net, stripped, "ns2d")
    np.testing.assert_array_equal(report.per_step["u"], no_p.per_step["u"])
    np.testing.assert_array_equal(report.per_step["v"], no_p.per_step["v"])
    assert "p_aligned" not in no_p.fields


def test_evaluate_alignment_removes_gauge_offset():
    split, net, params = _tg_setup(4)
    # shift every pressure output by a constant via the final bias
    shifted = params.copy()
    shifted.biases[-1][2] += 123.0
    report = evaluate(shifted, net, split, "ns2d")
    baseline = evaluate(params, net, split, "ns2d")
    np.testing.assert_allclose(
        report.per_step["p_aligned"], baseline.per_step["p_aligned"], rtol=1e-9
    )
    assert report.aggregates["p_raw"] > baseline.aggregates["p_raw"]


def test_evaluate_regime_mismatch():
    split, net, params = _tg_setup(5)
    with pytest.raises(ConfigurationError):
        evaluate(params, net, split, "rans3d")


def test_eval_report_csv_roundtrip(tmp_path):
    split, net, params = _tg_setup(6)
    report = evaluate(params, net, split, "ns2d")
    steps = tmp_path / "steps.csv"
    summary = tmp_path / "summary.csv"
    report.write(str(steps), str(summary))

    import csv

    with open(steps) as fh:
        rows = list(csv.DictReader(fh))
    by_field = {}
    for row in rows:
        by_field.setdefault(row["field"], []).append(float(row["epsilon"]))
    with open(summary) as fh:
        summary_rows = {r["field"]: float(r["arelative_l2"]) for r in csv.DictReader(fh)}
    for name, eps in by_field.items():
        assert summary_rows[name] == pytest.approx(np.mean(eps), rel=1e-12)


def test_histogram_zero_component_all_mass_at_zero():
    hist = gradient_histograms({"pde": np.zeros(100)})[0]
    assert hist.counts.sum() == 100
    center = np.flatnonzero(hist.counts)[0]
    assert hist.edges[center] < 0.0 < hist.edges[center + 1]


def test_histogram_counts_conservation():
    rng = np.random.default_rng(0)
    grad = rng.normal(size=8003) * np.logspace(-8, 0, 8003)
    hist = gradient_histograms({"data": grad})[0]
    assert hist.counts.sum() == 8003
    assert len(hist.counts) == 101
    assert np.all(np.diff(hist.edges) > 0)


def test_histogram_every_finite_value_lands_in_one_bin():
    rng = np.random.default_rng(1)
    grad = np.concatenate([rng.normal(size=500), [0.0, 1e-300, -1e-300]])
    hist = gradient_histograms({"x": grad})[0]
    assert hist.counts.sum() == grad.size


def test_histogram_nonfinite_excluded_and_counted():
    grad = np.array([1.0, np.nan, -2.0, np.inf])
    hist = gradient_histograms({"pde": grad})[0]
    assert hist.counts.sum() == 2
    assert hist.nonfinite_count == 2


def test_histogram_stats_match_adaptive_weighting_inputs():
    rng = np.random.default_rng(2)
    g_pde = rng.normal(size=1000)
    g_data = rng.normal(size=1000) * 0.01
    hists = gradient_histograms({"pde": g_pde, "data": g_data})
    by_name = {h.component: h for h in hists}
    max_pde, _ = grad_abs_stats(g_pde)
    _, mean_data = grad_abs_stats(g_data)
    assert by_name["pde"].max_abs == max_pde
    assert by_name["data"].mean_abs == mean_data
    lam_hat = instantaneous_lambda(g_pde, g_data)
    assert lam_hat == by_name["pde"].max_abs / by_name["data"].mean_abs


def test_histogram_determinism_and_csv():
    rng = np.random.default_rng(3)
    grads = {"pde": rng.normal(size=50), "data": rng.normal(size=50)}
    a = histograms_csv(gradient_histograms(grads))
    b = histograms_csv(gradient_histograms(grads))
    assert a == b
    assert a.startswith("component,bin_lo,bin_hi,count")
    assert len(a.strip().splitlines()) == 1 + 2 * 101
