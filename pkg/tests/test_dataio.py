import math
from datetime import datetime, timedelta

import numpy as np
import pytest

from distreg.data import Dataset
from distreg.dataio import (DataIOError, RollingPlan, TableSchema, calendar_features,
                            load_csv, monthly_plan, relative_change, rolling_eval,
                            rows_plan)
from distreg.estimator import fit_estimator
from distreg.nn import NetworkConfig, TrainConfig
from distreg.partition import even_partition
from distreg.simgen import training_range


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestSchema:
    def test_duplicate_names_rejected(self):
        with pytest.raises(DataIOError):
            TableSchema(target="y", numeric=("a", "a"))

    def test_from_dict(self):
        s = TableSchema.from_dict({"target": "y", "numeric": ["a"], "bounds": [0, 1]})
        assert s.bounds == (0.0, 1.0)


class TestLoadCsv:
    def test_one_hot_expansion(self, tmp_path):
        p = write(tmp_path, "y,temp,farm\n0.1,20,A\n0.2,21,B\n0.3,22,C\n")
        t = load_csv(p, TableSchema(target="y", numeric=("temp",), categorical=("farm",)))
        assert t.dataset.columns() == ["temp", "farm_A", "farm_B", "farm_C"]
        np.testing.assert_array_equal(t.dataset.X[:, 1:], np.eye(3))

    def test_one_hot_order_by_first_appearance(self, tmp_path):
        p = write(tmp_path, "y,farm\n1,C\n2,A\n3,C\n")
        t = load_csv(p, TableSchema(target="y", categorical=("farm",)))
        assert t.dataset.columns() == ["farm_C", "farm_A"]

    def test_missing_column(self, tmp_path):
        p = write(tmp_path, "y,a\n1,2\n")
        with pytest.raises(DataIOError, match="'b'"):
            load_csv(p, TableSchema(target="y", numeric=("a", "b")))

    def test_nan_value_rejected_with_line(self, tmp_path):
        p = write(tmp_path, "y,a\n1,2\n2,NaN\n")
        with pytest.raises(DataIOError, match=":3:"):
            load_csv(p, TableSchema(target="y", numeric=("a",)))

    def test_non_numeric_rejected(self, tmp_path):
        p = write(tmp_path, "y,a\n1,2\nfoo,3\n")
        with pytest.raises(DataIOError, match=":3:"):
            load_csv(p, TableSchema(target="y", numeric=("a",)))

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataIOError, match="empty"):
            load_csv(write(tmp_path, ""), TableSchema(target="y"))

    def test_header_only(self, tmp_path):
        with pytest.raises(DataIOError, match="no data rows"):
            load_csv(write(tmp_path, "y,a\n"), TableSchema(target="y", numeric=("a",)))

    def test_bad_timestamp(self, tmp_path):
        p = write(tmp_path, "y,ts\n1,not-a-date\n")
        with pytest.raises(DataIOError, match="timestamp"):
            load_csv(p, TableSchema(target="y", timestamp="ts"))

    def test_round_trip(self, tmp_path):
        ds = Dataset(np.random.default_rng(0).standard_normal((5, 3)),
                     np.random.default_rng(1).standard_normal(5))
        p = tmp_path / "rt.csv"
        ds.write_csv(p)
        back = load_csv(p, TableSchema(target="y", numeric=("x1", "x2", "x3")))
        np.testing.assert_array_equal(back.dataset.X, ds.X)
        np.testing.assert_array_equal(back.dataset.y, ds.y)


class TestCalendarFeatures:
    def test_january_first_midnight(self):
        feats, names = calendar_features([datetime(2021, 1, 1, 0, 0)])
        assert feats[0, 0] == pytest.approx(0.0)  # sin
        assert feats[0, 1] == pytest.approx(1.0)  # cos
        assert feats[0, 2] == 1.0  # hour_0
        assert names[:2] == ["doy_sin", "doy_cos"]

    def test_half_period(self):
        half = datetime(2021, 1, 1) + timedelta(days=365.25 / 2)
        feats, _ = calendar_features([half])
        assert feats[0, 0] == pytest.approx(0.0, abs=1e-2)
        assert feats[0, 1] == pytest.approx(-1.0, abs=1e-2)

    def test_one_year_apart(self):
        a, _ = calendar_features([datetime(2021, 3, 10, 6)])
        b, _ = calendar_features([datetime(2022, 3, 10, 6)])
        assert abs(a[0, 0] - b[0, 0]) < 1e-2
        assert abs(a[0, 1] - b[0, 1]) < 1e-2

    def test_hour_indicator(self):
        feats, names = calendar_features([datetime(2021, 6, 1, 13)])
        assert feats[0, 2 + 13] == 1.0
        assert feats[0, 2:].sum() == 1.0


class TestPlans:
    def test_monthly_plan_24_months(self):
        ts = [datetime(2020, 1, 1) + timedelta(days=d) for d in range(731)]
        plan = monthly_plan(ts, initial_months=12, n_folds=12)
        assert plan.n_folds == 12
        assert plan.folds[0][0] == 366  # 2020 is a leap year

    def test_monthly_plan_needs_enough_months(self):
        ts = [datetime(2020, 1, 1) + timedelta(days=d) for d in range(100)]
        with pytest.raises(DataIOError):
            monthly_plan(ts, 12, 12)

    def test_rows_plan(self):
        plan = rows_plan(100, 10, 3)
        assert plan.folds == ((100, 110), (110, 120), (120, 130))

    def test_non_consecutive_rejected(self):
        with pytest.raises(DataIOError, match="consecutive"):
            RollingPlan(((10, 20), (25, 30)))

    def test_invalid_bounds_rejected(self):
        with pytest.raises(DataIOError):
            RollingPlan(((10, 10),))


def seasonal_table(n_days=731, seed=0):
    """Daily sinusoidal target with noise, time-sorted."""
    rng = np.random.default_rng(seed)
    ts = [datetime(2020, 1, 1) + timedelta(days=d) for d in range(n_days)]
    feats, names = calendar_features(ts)
    X = feats[:, :2]  # seasonal sin/cos only
    y = 1.0 + 0.8 * X[:, 0] + 0.5 * X[:, 1] + 0.2 * rng.standard_normal(n_days)
    return Dataset(X, y, feature_names=names[:2]), ts


def small_recipe(seed=0, loss="jbce"):
    def fit(train):
        l, u = training_range(train.y)
        return fit_estimator(train, even_partition(l, u, 10),
                             NetworkConfig(train.n_features, 11, hidden_sizes=(16,),
                                           dropout_rate=0.0),
                             TrainConfig(loss=loss, epochs=30, seed=seed,
                                         learning_rate=1e-2))
    return fit


class TestRollingEval:
    def test_twelve_folds_complete(self):
        data, ts = seasonal_table()
        plan = monthly_plan(ts, 12, 12)
        result = rolling_eval(data, plan, small_recipe(), timestamps=ts)
        assert len(result.reports_a) == 12
        for rep in result.reports_a:
            assert math.isfinite(rep.crps)
            assert 0.8 <= rep.coverage90 <= 1.0

    def test_identical_recipes_zero_relative_change(self):
        data, ts = seasonal_table(400)
        plan = monthly_plan(ts, 12, 1)
        result = rolling_eval(data, plan, small_recipe(), small_recipe(), timestamps=ts)
        assert result.relative_change["crps"] == 0.0
        assert result.relative_change["aqtl"] == 0.0

    def test_no_temporal_leakage(self):
        data, ts = seasonal_table()
        plan = monthly_plan(ts, 12, 12)
        for train_end, test_end in plan.folds:
            assert max(ts[:train_end]) < min(ts[train_end:test_end])

    def test_unsorted_data_rejected(self):
        data, ts = seasonal_table(400)
        with pytest.raises(DataIOError, match="sorted"):
            rolling_eval(data, rows_plan(300, 50, 2), small_recipe(),
                         timestamps=list(reversed(ts)))

    def test_fold_beyond_data_rejected(self):
        data, _ = seasonal_table(100)
        with pytest.raises(DataIOError):
            rolling_eval(data, rows_plan(90, 20, 1), small_recipe())

    def test_outputs(self, tmp_path):
        data, _ = seasonal_table(400)
        result = rolling_eval(data, rows_plan(300, 50, 2), small_recipe())
        csv_path = tmp_path / "folds.csv"
        result.write_csv(csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "fold,n,crps,aqtl,coverage90"
        assert len(lines) == 3
        agg = result.aggregate()
        assert agg["folds"] == 2


def test_relative_change_helper():
    assert relative_change([1.0, 2.0], [2.0, 2.0]) == pytest.approx((-0.5 + 0.0) / 2)
