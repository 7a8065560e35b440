import csv

import numpy as np
import pytest

from distreg.experiments import (ConsistencySpec, ExperimentSpec, bins_rule, fit_cell,
                                 gen_location_scale, integrated_squared_error,
                                 location_scale_pdf, median_ise_by_n, run_consistency,
                                 run_grid, write_consistency_csv, write_grid_csv)


class TestSpecValidation:
    def test_bad_model(self):
        with pytest.raises(ValueError):
            ExperimentSpec(model_id=7)

    def test_bad_sample_sizes(self):
        with pytest.raises(ValueError):
            ConsistencySpec(sample_sizes=(4000, 1000))


class TestRunGrid:
    def test_single_cell(self):
        spec = ExperimentSpec(model_id=3, replicates=1, n_train=200, n_test=50,
                              bin_counts=(6,), losses=("multinomial",),
                              classifiers=("logistic",), epochs=5)
        rows = run_grid(spec)
        assert len(rows) == 1
        assert rows[0]["status"] == "ok"
        assert 0 <= rows[0]["coverage90"] <= 1

    def test_failed_cell_recorded_not_raised(self):
        spec = ExperimentSpec(model_id=3, replicates=1, n_train=100, n_test=20,
                              bin_counts=(1,), losses=("multinomial",),
                              classifiers=("logistic",), epochs=2)
        rows = run_grid(spec)
        assert len(rows) == 1
        assert rows[0]["status"].startswith("error")
        assert np.isnan(rows[0]["crps"])

    def test_deterministic(self):
        spec = ExperimentSpec(model_id=3, replicates=2, n_train=150, n_test=30,
                              bin_counts=(5,), losses=("jbce",),
                              classifiers=("logistic",), epochs=3, master_seed=4)
        a = run_grid(spec)
        b = run_grid(spec)
        for ra, rb in zip(a, b):
            assert ra["crps"] == rb["crps"]

    def test_csv_output(self, tmp_path):
        spec = ExperimentSpec(model_id=3, replicates=1, n_train=100, n_test=20,
                              bin_counts=(4,), losses=("jbce",),
                              classifiers=("logistic",), epochs=2)
        path = tmp_path / "grid.csv"
        write_grid_csv(run_grid(spec), path)
        with open(path) as fh:
            recs = list(csv.DictReader(fh))
        assert len(recs) == 1
        assert set(recs[0]) == {"model", "replicate", "loss", "classifier", "bins",
                                "ensembleK", "crps", "aqtl", "coverage90",
                                "wall_seconds", "status"}

    def test_fit_cell_rejects_unknown_classifier(self):
        data = gen_location_scale(50, 0)
        with pytest.raises(ValueError):
            fit_cell(data, -2, 2, loss="jbce", classifier="forest", bins=4,
                     ensemble_k=1, seed=0, epochs=1, batch_size=16, learning_rate=1e-3)


class TestConsistency:
    def test_bins_rule(self):
        assert bins_rule(1000) == 10
        assert bins_rule(16000) == 26

    def test_oracle_self_check(self):
        # the analytic truth against itself integrates to exactly zero
        for x in (-0.5, 0.0, 0.8):
            ise = integrated_squared_error(
                lambda ys: location_scale_pdf(x, ys),
                lambda ys: location_scale_pdf(x, ys), -2, 2)
            assert ise == 0.0

    def test_ise_nonnegative_and_decreasing(self):
        spec = ConsistencySpec(sample_sizes=(500, 2000), replicates=2, seed=1,
                               epochs=40)
        rows = run_consistency(spec)
        assert all(r["ise"] >= 0 for r in rows)
        med = median_ise_by_n(rows)
        assert med[2000] < med[500]

    def test_csv_output(self, tmp_path):
        rows = [{"n": 100, "bins": 5, "replicate": 1, "ise": 0.5}]
        path = tmp_path / "cons.csv"
        write_consistency_csv(rows, path)
        assert path.read_text().startswith("n,bins,replicate,ise")
