import json
import os
import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

import main
from reporting.dataset import write_wide_csv
from reporting.fit_report import FitReport
from simlab.generators import make_yield_fixture, simulate_model


def run(*argv):
    return main.main([str(a) for a in argv])


@pytest.fixture
def model1_csv(tmp_path):
    draw = simulate_model(1, N=80, m=41, seed=2)
    path = tmp_path / "model1.csv"
    write_wide_csv(path, draw.sample.grid.points, draw.sample.values)
    return path


@pytest.fixture
def rank_two_csv(tmp_path):
    rng = np.random.default_rng(12)
    points = np.linspace(0.0, 1.0, 41)
    curves = np.vstack([np.sin(2 * np.pi * points), points ** 2])
    values = 1.0 + rng.standard_normal((60, 2)) @ curves
    path = tmp_path / "rank_two.csv"
    write_wide_csv(path, points, values)
    return path, values


class TestFit:
    def test_stationary_fit_writes_outputs(self, tmp_path, model1_csv):
        out = tmp_path / "fit"
        assert run("fit", "--input", model1_csv, "--mode", "stationary", "--grid", 41,
                   "--mc-reps", 200, "--out", out) == 0

        report = FitReport.load(out / "report.json")
        factors = pd.read_csv(out / "factors.csv")
        assert factors.shape == (80, report.K_hat + 1)
        assert report.tests["stationarity"] is not None
        assert report.provenance.smoothing_basis is None
        assert len(report.provenance.input_sha256) == 64

    def test_noiseless_round_trip(self, tmp_path, rank_two_csv):
        path, values = rank_two_csv
        out = tmp_path / "fit"
        assert run("fit", "--input", path, "--mode", "stationary", "--grid", 41,
                   "--n-factors", 2, "--mc-reps", 200, "--out", out) == 0

        reconstruction = pd.read_csv(out / "reconstruction.csv").iloc[:, 1:].to_numpy()
        assert np.max(np.abs(reconstruction - values)) <= 1e-6

        report = json.loads((out / "report.json").read_text())
        assert report["K_hat"] == 2
        for k in (1, 2):
            for name in (f"loading_{k}.svg", f"factor_{k}.svg"):
                assert ET.parse(out / name).getroot().tag.endswith("svg")

    def test_smoothed_yield_panel(self, tmp_path):
        fixture = make_yield_fixture(N=120, seed=1)
        path = tmp_path / "yields.csv"
        write_wide_csv(path, fixture.maturities, fixture.values)
        out = tmp_path / "fit"
        assert run("fit", "--input", path, "--mode", "nonstationary", "--n-nonstationary", 1,
                   "--n-factors", 3, "--mc-reps", 200, "--out", out) == 0

        report = FitReport.load(out / "report.json")
        assert (report.r_hat, report.K_hat) == (1, 3)
        assert report.provenance.smoothing_basis == 8
        assert report.provenance.observation_points == list(fixture.maturities)

    def test_empty_input(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        assert run("fit", "--input", path, "--out", tmp_path / "fit") == 2

    def test_missing_input(self, tmp_path):
        assert run("fit", "--input", tmp_path / "absent.csv", "--out", tmp_path / "fit") == 2

    def test_invalid_option(self, tmp_path, model1_csv):
        assert run("fit", "--input", model1_csv, "--k0", 1, "--out", tmp_path / "fit") == 2

    def test_too_few_points_to_smooth(self, tmp_path):
        path = tmp_path / "three.csv"
        write_wide_csv(path, [0.0, 0.5, 1.0], np.random.default_rng(0).standard_normal((30, 3)))
        assert run("fit", "--input", path, "--mode", "stationary", "--out", tmp_path / "fit") == 2

    def test_estimation_failure(self, tmp_path):
        path = tmp_path / "flat.csv"
        write_wide_csv(path, np.linspace(0, 1, 11), np.ones((30, 11)))
        assert run("fit", "--input", path, "--mode", "stationary", "--grid", 11,
                   "--out", tmp_path / "fit") == 3

    def test_auto_mode_needs_fifty_curves(self, tmp_path):
        path = tmp_path / "short.csv"
        write_wide_csv(path, np.linspace(0, 1, 11), np.random.default_rng(1).standard_normal((30, 11)))
        assert run("fit", "--input", path, "--grid", 11, "--out", tmp_path / "fit") == 3


class TestSimulate:
    def test_runs_are_byte_identical(self, tmp_path):
        args = ["simulate", "--model", 1, "--n", 60, "--reps", 3, "--seed", 7, "--grid", 21, "--workers", 1]
        assert run(*args, "--out", tmp_path / "a") == 0
        assert run(*args, "--out", tmp_path / "b") == 0
        first = (tmp_path / "a" / "results.csv").read_bytes()
        assert first == (tmp_path / "b" / "results.csv").read_bytes()
        assert (tmp_path / "a" / "timings.csv").exists()

    def test_nonstationary_summary_columns(self, tmp_path):
        out = tmp_path / "model4"
        assert run("simulate", "--model", 4, "--n", 100, "--reps", 3, "--grid", 21,
                   "--k-rules", "ratio", "--workers", 1, "--out", out) == 0
        columns = pd.read_csv(out / "summary.csv").columns
        assert any(c.startswith("share_r_ratio_") for c in columns)
        assert any(c.startswith("share_kr_ratio_") for c in columns)

    def test_unknown_model(self, tmp_path):
        assert run("simulate", "--model", 9, "--n", 100, "--out", tmp_path) == 2

    def test_too_few_curves(self, tmp_path):
        assert run("simulate", "--model", 1, "--n", 10, "--out", tmp_path) == 2


class TestReport:
    def test_report_from_simulation(self, tmp_path):
        sim = tmp_path / "sim"
        assert run("simulate", "--model", 1, "--n", 60, "--reps", 2, "--grid", 21,
                   "--workers", 1, "--out", sim) == 0
        out = tmp_path / "report"
        assert run("report", "--input", sim / "results.csv", "--out", out) == 0

        boxes = pd.read_csv(out / "boxplot_summary.csv")
        assert set(boxes["estimator"]) == {"fdf", "pca"}
        svg = out / "boxplot_model1_loading1.svg"
        assert ET.parse(svg).getroot().tag.endswith("svg")
        assert (out / "kshare_model1_ratio.svg").exists()

    def test_single_replication(self, tmp_path):
        path = tmp_path / "results.csv"
        pd.DataFrame({"model_id": [1], "rep_index": [0], "ise_fdf_1": [0.02], "ise_pca_1": [0.05],
                      "k_hat_ratio": [1], "error": [""]}).to_csv(path, index=False)
        assert run("report", "--input", path, "--out", tmp_path / "report") == 0
        boxes = pd.read_csv(tmp_path / "report" / "boxplot_summary.csv")
        fdf = boxes[boxes["estimator"] == "fdf"].iloc[0]
        assert fdf["min"] == fdf["q1"] == fdf["median"] == fdf["q3"] == fdf["max"] == 0.02

    def test_missing_file(self, tmp_path):
        assert run("report", "--input", tmp_path / "absent.csv", "--out", tmp_path) == 2

    def test_schema_mismatch(self, tmp_path):
        path = tmp_path / "results.csv"
        pd.DataFrame({"a": [1]}).to_csv(path, index=False)
        assert run("report", "--input", path, "--out", tmp_path / "report") == 2


def test_missing_subcommand():
    assert main.main([]) == 2


@pytest.mark.parametrize("subcommand", [
    ["fit", "--input", "x.csv"],
    ["simulate", "--model", "3", "--n", "100"],
])
def test_level_refine_is_opt_in(subcommand):
    parser = main.build_parser()
    assert main._config_from_args(parser.parse_args(subcommand)).level_refine is False
    assert main._config_from_args(parser.parse_args(subcommand + ["--level-refine"])).level_refine is True


def test_blas_threads_follow_validated_setting(monkeypatch):
    for variable in main.BLAS_THREAD_VARIABLES:
        monkeypatch.delenv(variable, raising=False)
    main.set_blas_threads(main.settings.BLAS_THREADS)
    for variable in main.BLAS_THREAD_VARIABLES:
        assert os.environ[variable] == str(main.settings.BLAS_THREADS)
