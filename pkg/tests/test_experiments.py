import json
import os

import pandas as pd
import pytest
from pandas.testing import assert_frame_equal

from src.experiments.runner import ExperimentRunner
from src.experiments.spec import DEFAULT_KERNELS, ExperimentSpec


def run(tmp_path, **kwargs):
    spec = ExperimentSpec(**kwargs)
    runner = ExperimentRunner(spec, out_dir=str(tmp_path))
    return spec, runner, runner.run()


def load_json(runner, spec):
    with open(os.path.join(runner.experiment_dir, f"{spec.stem}.json")) as handle:
        return json.load(handle)


def test_spec_defaults_and_stem():
    spec = ExperimentSpec("metric_hist")
    assert (spec.trials, spec.dims, spec.k) == (500, (50, 50), 20)
    assert spec.stem == "metric_hist_m50_n50_k20_t500_seed0"
    assert ExperimentSpec("pathlen_sweep", full=True).stem.endswith("_full_seed0")
    assert ExperimentSpec("kernel_sv").kernels == DEFAULT_KERNELS
    assert spec.to_dict()["dims"] == [50, 50]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"name": "fig7"},
        {"name": "metric_hist", "trials": 0},
        {"name": "metric_hist", "dims": (10, 10), "k": 11},
        {"name": "pathlen_sweep", "gamma": 0.9},
        {"name": "metric_hist", "workers": 0},
        {"name": "timing_sweep", "dims": (20, 20), "k_values": (5, 30)},
        {"name": "kahan", "s": 1.5},
        {"name": "sharpness", "k": 1},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentSpec(**kwargs)


def test_pathlen_sweep_sampled(tmp_path):
    spec, runner, summary = run(tmp_path, name="pathlen_sweep", trials=25, dims=(6, 6), k=2, seed=3)
    frame = pd.read_csv(os.path.join(runner.experiment_dir, f"{spec.stem}.csv"))
    assert len(frame) == 25
    assert summary["starts"] == 25
    assert summary["all_certified"]
    assert summary["distinct_local_maxima"] >= 1
    assert os.path.isfile(os.path.join(runner.experiment_dir, f"{spec.stem}_hist.csv"))
    assert load_json(runner, spec)["schema_version"] == 1


def test_pathlen_sweep_full_visits_every_node(tmp_path):
    _, _, summary = run(tmp_path, name="pathlen_sweep", dims=(4, 4), k=2, full=True)
    assert summary["starts"] == 36


def test_worker_pool_does_not_change_results(tmp_path):
    spec, serial, _ = run(tmp_path / "serial", name="metric_hist", trials=6, dims=(12, 12), k=4, seed=5)
    _, parallel, _ = run(tmp_path / "parallel", name="metric_hist", trials=6, dims=(12, 12), k=4, seed=5, workers=2)
    name = f"{spec.stem}.csv"
    assert_frame_equal(
        pd.read_csv(os.path.join(serial.experiment_dir, name)),
        pd.read_csv(os.path.join(parallel.experiment_dir, name)),
    )


def test_metric_hist_summary(tmp_path):
    spec, runner, summary = run(tmp_path, name="metric_hist", trials=8, dims=(15, 15), k=5)
    frame = pd.read_csv(os.path.join(runner.experiment_dir, f"{spec.stem}.csv"))
    assert list(frame.columns) == ["trial", "mu_gecp", "mu_cpqr"]
    assert (frame[["mu_gecp", "mu_cpqr"]] >= 1.0).all().all()
    assert summary["max_mu_gecp"] == pytest.approx(frame["mu_gecp"].max())
    hist = pd.read_csv(os.path.join(runner.experiment_dir, f"{spec.stem}_hist.csv"))
    assert hist["gecp_count"].sum() == 8


def test_kernel_sv_sandwich(tmp_path):
    kernels = (("runge", 10.0, 0), ("wendland", 1.0, 1))
    spec, runner, summary = run(tmp_path, name="kernel_sv", dims=(40, 40), k=3, kernels=kernels)
    assert summary["all_sandwich_passed"]
    assert [row["kernel"] for row in summary["kernels"]] == ["runge_beta10", "wendland_s1"]
    table = pd.read_csv(os.path.join(runner.experiment_dir, f"{spec.stem}_runge_beta10.csv"))
    assert list(table.columns) == ["j", "sigma_A", "sigma_Ak", "sigma_residual"]


def test_sharpness_experiment(tmp_path):
    _, _, summary = run(tmp_path, name="sharpness")
    assert summary["certified"]
    assert summary["ge_path_length"] == 0
    assert summary["worst_neighbor_ratio"] == pytest.approx(1.0, abs=1e-10)
    assert summary["single_entry_swap_ratio"] == pytest.approx(0.5, abs=1e-10)
    assert summary["sigma1_residual"] == pytest.approx(52.5, abs=1e-8)
    assert summary["sigma_k_plus_1"] <= 2.0
    assert summary["residual_ratio"] >= summary["residual_ratio_floor"] == pytest.approx(26.25)
    assert summary["cholesky_link_agree"]


def test_kahan_experiment(tmp_path):
    _, _, summary = run(tmp_path, name="kahan")
    assert summary["floors_met"]
    for row in summary["rows"]:
        assert row["greedy_keeps_order"]
        assert row["mu_b"] == pytest.approx(row["verifier_worst_ratio"], rel=1e-8)


def test_timing_sweep_reports_ratios(tmp_path):
    spec, runner, summary = run(tmp_path, name="timing_sweep", dims=(40, 40), k_values=(4, 8))
    frame = pd.read_csv(os.path.join(runner.experiment_dir, f"{spec.stem}.csv"))
    assert frame["k"].tolist() == [4, 8]
    assert (frame[["ge_ratio", "qr_ratio"]] > 0).all().all()
    assert summary["soft_max_ratio"] == 4.0
