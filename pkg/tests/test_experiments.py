"""Tests for the comparative protocols and the benchmark table."""

import numpy as np
import pytest

from blurgp.data import synth_circle, write_csv
from blurgp.ep import EpConfig
from blurgp.exceptions import InvalidConfigError
from blurgp.experiments import (
    CIRCLE_DEFAULTS,
    CLASSES_DEFAULTS,
    MODES,
    benchmark,
    circle_protocol,
    classes_protocol,
    fit_once,
    write_benchmark_csv,
)
from blurgp.likelihoods import GaussianNoise
from blurgp.posterior import predict_mean

RECORD_KEYS = {
    "sweeps", "converged", "skipped", "clamped", "visits",
    "vb_min_eig", "vb_max_diag",
}


class TestDefaults:
    def test_standing_protocol_settings(self):
        """The published comparison settings are pinned."""
        assert MODES == ("full", "sphere", "zero")
        assert CIRCLE_DEFAULTS["m"] == 4
        assert CIRCLE_DEFAULTS["n"] == 100
        assert CLASSES_DEFAULTS["m"] == 3
        assert CLASSES_DEFAULTS["n_test"] == 2000


class TestFitOnce:
    def test_returns_state_and_health_record(self):
        """One pipeline pass produces a predictive state and counters."""
        train = synth_circle(n=30, seed=5)
        state, record = fit_once(
            train, sigma=0.3, m=3, mode="full",
            lik=GaussianNoise(v_y=0.5), cfg=EpConfig(), kmeans_seed=5,
        )
        assert set(record) == RECORD_KEYS
        assert record["sweeps"] >= 1
        assert record["visits"] == record["sweeps"] * 30
        assert record["vb_max_diag"] > 0
        assert np.isfinite(predict_mean(state, train.inputs[0]))


class TestCircleProtocol:
    def test_structure_and_determinism(self):
        """Small protocol runs fill every mode and repeat, reproducibly."""
        kwargs = dict(n=30, m=3, repeats=2, n_grid=50, sigma=0.3, v_y=0.5)
        results = circle_protocol(**kwargs)
        assert set(results["metric"]) == set(MODES)
        for mode in MODES:
            values = results["metric"][mode]
            assert values.shape == (2,)
            assert np.all(np.isfinite(values))
            assert len(results["fits"][mode]) == 2
            assert set(results["fits"][mode][0]) == RECORD_KEYS
        again = circle_protocol(**kwargs)
        for mode in MODES:
            np.testing.assert_array_equal(
                again["metric"][mode], results["metric"][mode]
            )


class TestClassesProtocol:
    def test_error_rates_are_valid(self):
        """Error rates land in [0, 1] for every mode."""
        results = classes_protocol(n_train=40, n_test=50, m=3, repeats=1)
        for mode in MODES:
            values = results["metric"][mode]
            assert values.shape == (1,)
            assert 0.0 <= values[0] <= 1.0


class TestBenchmark:
    def test_row_order_and_reference_rows(self):
        """Rows come out in (M, mode, repeat) order with references last."""
        rows = benchmark(
            "synth-circle", m_list=[2, 3], modes=("full", "zero"),
            repeats=2, n=30, sigma=0.3, v_y=0.5,
        )
        grid, reference = rows[:-2], rows[-2:]
        assert len(grid) == 2 * 2 * 2
        expected = [
            (m, mode, r)
            for m in (2, 3) for mode in ("full", "zero") for r in (0, 1)
        ]
        assert [(row["M"], row["mode"], row["repeat"]) for row in grid] == expected
        for row in grid:
            assert row["dataset"] == "synth-circle"
            assert row["metric"] == "rmse"
            assert np.isfinite(row["value"])
        for r, row in enumerate(reference):
            assert row["mode"] == "full-gp"
            assert row["M"] == 30
            assert row["repeat"] == r
            assert row["sweeps"] == 0
            assert row["converged"]

    def test_classification_metric_and_no_reference(self):
        """Class benchmarks report error-rate; reference=False drops the tail."""
        rows = benchmark(
            "synth-classes", m_list=[2], modes=("zero",), repeats=1,
            n_train=20, n_test=10, reference=False,
        )
        assert len(rows) == 1
        assert rows[0]["metric"] == "error-rate"
        assert 0.0 <= rows[0]["value"] <= 1.0

    def test_csv_dataset_needs_a_task(self, tmp_path):
        """A CSV path without a task is refused."""
        path = tmp_path / "points.csv"
        write_csv(synth_circle(n=24, seed=0), path)
        with pytest.raises(InvalidConfigError):
            benchmark(str(path), m_list=[2], modes=("zero",), repeats=1)

    def test_csv_dataset_runs_with_split(self, tmp_path):
        """A CSV dataset is split per repeat and benchmarked end to end."""
        path = tmp_path / "points.csv"
        write_csv(synth_circle(n=24, seed=0), path)
        rows = benchmark(
            str(path), task="regression", m_list=[2], modes=("zero",),
            repeats=2, sigma=0.3, v_y=0.5,
        )
        grid = [row for row in rows if row["mode"] != "full-gp"]
        reference = [row for row in rows if row["mode"] == "full-gp"]
        assert len(grid) == 2
        assert len(reference) == 2
        assert all(row["dataset"] == str(path) for row in rows)
        assert all(row["M"] == 12 for row in reference)

    def test_rerun_matches_exactly(self):
        """The same flags produce identical rows."""
        kwargs = dict(
            dataset="synth-classes", m_list=[2], modes=("full",),
            repeats=2, n_train=20, n_test=10, reference=False,
        )
        assert benchmark(**kwargs) == benchmark(**kwargs)


class TestWriteBenchmarkCsv:
    def test_header_values_and_rerun_bytes(self, tmp_path):
        """The CSV carries the fixed header and rewrites byte-identically."""
        rows = benchmark(
            "synth-circle", m_list=[2], modes=("zero",), repeats=1,
            n=20, sigma=0.3, v_y=0.5,
        )
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        write_benchmark_csv(rows, first)
        write_benchmark_csv(rows, second)
        text = first.read_text()
        lines = text.strip().split("\n")
        assert lines[0] == "dataset,M,mode,repeat,metric,value,sweeps,converged"
        assert len(lines) == 1 + len(rows)
        assert all(line.endswith(("true", "false")) for line in lines[1:])
        assert first.read_bytes() == second.read_bytes()

    def test_nan_value_is_written_as_nan(self, tmp_path):
        """Failed fits serialize as nan without breaking the table."""
        rows = [{
            "dataset": "synth-circle", "M": 2, "mode": "zero", "repeat": 0,
            "metric": "rmse", "value": float("nan"), "sweeps": 0,
            "converged": False,
        }]
        path = tmp_path / "t.csv"
        write_benchmark_csv(rows, path)
        assert "nan" in path.read_text()
