import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import estimator_with_probs
from distreg.data import Dataset
from distreg.estimator import (DensityEstimator, EnsembleEstimator, fit_ensemble,
                               fit_estimator)
from distreg.nn import NetworkConfig, TrainConfig, init_network
from distreg.partition import Partition, even_partition, random_partition
from distreg.simgen import gen_model3, training_range

HALF = Partition(0, 1, (0.5,))


def random_estimator(seed, m=7):
    part = random_partition(0, 1, m, seed)
    net = init_network(NetworkConfig(2, m + 1, hidden_sizes=(6,), dropout_rate=0.0),
                       seed + 1)
    return DensityEstimator(part, net)


class TestPdf:
    def test_uniform_probs_give_unit_density(self):
        est = estimator_with_probs(even_partition(0, 1, 3), [0.25] * 4)
        for y in (0.0, 0.3, 0.8, 1.0):
            assert est.pdf([0.0], y) == pytest.approx(1.0)

    def test_two_bin_values(self):
        est = estimator_with_probs(HALF, [0.8, 0.2])
        assert est.pdf([0.0], 0.25) == pytest.approx(1.6)
        assert est.pdf([0.0], 0.75) == pytest.approx(0.4)

    def test_out_of_range_rejected(self):
        est = estimator_with_probs(HALF, [0.8, 0.2])
        with pytest.raises(Exception):
            est.pdf([0.0], 1.5)


class TestCdf:
    def test_two_bin_values(self):
        est = estimator_with_probs(HALF, [0.8, 0.2])
        assert est.cdf([0.0], 0.5) == pytest.approx(0.8)
        assert est.cdf([0.0], 0.25) == pytest.approx(0.4)
        assert est.cdf([0.0], 1.0) == pytest.approx(1.0)
        assert est.cdf([0.0], 0.0) == pytest.approx(0.0)

    def test_clamps_outside_range(self):
        est = estimator_with_probs(HALF, [0.8, 0.2])
        assert est.cdf([0.0], -3.0) == 0.0
        assert est.cdf([0.0], 42.0) == 1.0

    def test_nondecreasing_and_continuous(self):
        est = random_estimator(3)
        ys = np.linspace(0, 1, 500)
        F = est.cdf_batch([[0.1, -0.4]], ys)[0]
        assert np.all(np.diff(F) >= -1e-12)
        assert F[0] == pytest.approx(0.0, abs=1e-12)
        assert F[-1] == pytest.approx(1.0, abs=1e-9)


class TestQuantile:
    def test_inverse_of_cdf_examples(self):
        est = estimator_with_probs(HALF, [0.8, 0.2])
        assert est.quantile([0.0], 0.4) == pytest.approx(0.25)
        assert est.quantile([0.0], 0.8) == pytest.approx(0.5)

    def test_uniform_median_is_midpoint(self):
        est = estimator_with_probs(even_partition(0, 1, 3), [0.25] * 4)
        assert est.quantile([0.0], 0.5) == pytest.approx(0.5)

    def test_invalid_tau(self):
        est = estimator_with_probs(HALF, [0.8, 0.2])
        for tau in (0.0, 1.0, -0.2):
            with pytest.raises(ValueError):
                est.quantile([0.0], tau)

    @given(st.integers(0, 300), st.floats(0.01, 0.99))
    @settings(max_examples=100, deadline=None)
    def test_round_trip(self, seed, tau):
        est = random_estimator(seed)
        x = [0.2, -0.7]
        q = est.quantile(x, tau)
        assert est.cdf(x, q) == pytest.approx(tau, abs=1e-8)

    def test_round_trip_from_y(self):
        est = random_estimator(11)
        x = [0.0, 1.0]
        for y in np.linspace(0.01, 0.99, 17):
            assert est.quantile(x, est.cdf(x, y)) == pytest.approx(y, abs=1e-8)


class TestInterval:
    def test_uniform_estimator_interval(self):
        est = estimator_with_probs(even_partition(0, 1, 3), [0.25] * 4)
        lo, hi = est.predict_interval([0.0], 0.9)
        assert (lo, hi) == (pytest.approx(0.05), pytest.approx(0.95))

    def test_level_maps_to_tail_quantiles(self):
        est = random_estimator(5)
        lo, hi = est.predict_interval([0.3, 0.3], 0.9)
        assert lo == pytest.approx(est.quantile([0.3, 0.3], 0.05))
        assert hi == pytest.approx(est.quantile([0.3, 0.3], 0.95))
        assert lo <= hi

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            random_estimator(1).predict_interval([0, 0], 1.5)


class TestEnsemble:
    def test_identical_members_equal_single(self):
        single = random_estimator(9)
        ens = EnsembleEstimator([single] * 3)
        x, y = [0.5, 0.5], 0.37
        assert ens.pdf(x, y) == pytest.approx(single.pdf(x, y))
        assert ens.cdf(x, y) == pytest.approx(single.cdf(x, y))

    def test_pdf_is_arithmetic_mean(self):
        a = estimator_with_probs(HALF, [0.8, 0.2])
        b = estimator_with_probs(HALF, [0.2, 0.8])
        ens = EnsembleEstimator([a, b])
        assert ens.pdf([0.0], 0.25) == pytest.approx((1.6 + 0.4) / 2)

    def test_cdf_is_mean_of_member_cdfs(self):
        members = [random_estimator(s) for s in range(4)]
        ens = EnsembleEstimator(members)
        X = np.array([[0.1, 0.2]])
        ys = np.linspace(0, 1, 101)
        expect = np.mean([m.cdf_batch(X, ys) for m in members], axis=0)
        np.testing.assert_allclose(ens.cdf_batch(X, ys), expect, atol=1e-12)

    def test_density_integrates_to_one(self):
        # midpoint Riemann sum; cells straddling a bin edge cap the
        # reachable accuracy for a piecewise-constant density
        ens = EnsembleEstimator([random_estimator(s) for s in range(5)])
        n = 10_000
        mids = (np.arange(n) + 0.5) / n
        vals = np.array([ens.pdf([0.4, -0.1], y) for y in mids])
        assert vals.mean() == pytest.approx(1.0, abs=5e-3)
        # exact route: each member's bin masses sum to one
        for m in ens.members:
            assert float(m.bin_probs([0.4, -0.1]).sum()) == pytest.approx(1.0, abs=1e-12)

    def test_quantile_inverts_average_cdf(self):
        ens = EnsembleEstimator([random_estimator(s) for s in range(3)])
        x = [0.2, 0.9]
        for tau in (0.1, 0.5, 0.9):
            q = ens.quantile(x, tau)
            assert ens.cdf(x, q) == pytest.approx(tau, abs=1e-6)

    def test_members_must_share_range(self):
        a = estimator_with_probs(Partition(0, 1, (0.5,)), [0.5, 0.5])
        b = estimator_with_probs(Partition(0, 2, (1.0,)), [0.5, 0.5])
        with pytest.raises(ValueError):
            EnsembleEstimator([a, b])


class TestFit:
    def test_empty_data_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            fit_estimator(Dataset(np.empty((0, 1)), np.empty(0)),
                          even_partition(0, 1, 3),
                          NetworkConfig(1, 4, hidden_sizes=()), TrainConfig())

    def test_out_of_range_rows_listed(self):
        data = Dataset([[0.0], [1.0], [2.0]], [0.5, 3.0, -1.0])
        with pytest.raises(ValueError, match=r"rows \[1, 2\]"):
            fit_estimator(data, even_partition(0, 1, 3),
                          NetworkConfig(1, 4, hidden_sizes=()), TrainConfig())

    def test_single_occupied_bin(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((100, 1))
        y = rng.uniform(0.3, 0.45, 100)  # all responses in bin [0.25, 0.5)
        est = fit_estimator(Dataset(X, y), even_partition(0, 1, 3),
                            NetworkConfig(1, 4, hidden_sizes=(), dropout_rate=0.0),
                            TrainConfig(loss="multinomial", epochs=200, seed=0,
                                        learning_rate=1e-2))
        assert float(est.bin_probs([0.0])[1]) > 0.9

    def test_model3_cdf_monotone_at_random_inputs(self):
        full, _ = gen_model3(2000, 1)
        l, u = training_range(full.y)
        est = fit_estimator(full, even_partition(l, u, 40),
                            NetworkConfig(1, 41, hidden_sizes=(32,), dropout_rate=0.2),
                            TrainConfig(loss="jbce", epochs=20, seed=0))
        rng = np.random.default_rng(7)
        X = rng.uniform(0, 10, (100, 1))
        F = est.cdf_batch(X, np.linspace(l, u, 200))
        assert np.all(np.diff(F, axis=1) >= -1e-12)

    def test_ensemble_k1_reduces_to_single_random_partition(self):
        full, _ = gen_model3(300, 2)
        l, u = training_range(full.y)
        ncfg = NetworkConfig(1, 11, hidden_sizes=(), dropout_rate=0.0)
        tcfg = TrainConfig(loss="multinomial", epochs=5, seed=0)
        ens = fit_ensemble(full, l, u, 10, 1, ncfg, tcfg, seed=42)
        assert ens.k == 1
        assert isinstance(ens.members[0], DensityEstimator)

    def test_ensemble_deterministic(self):
        full, _ = gen_model3(300, 3)
        l, u = training_range(full.y)
        ncfg = NetworkConfig(1, 6, hidden_sizes=(), dropout_rate=0.0)
        tcfg = TrainConfig(loss="jbce", epochs=3, seed=0)
        a = fit_ensemble(full, l, u, 5, 3, ncfg, tcfg, seed=7)
        b = fit_ensemble(full, l, u, 5, 3, ncfg, tcfg, seed=7)
        assert a.to_json() == b.to_json()

    def test_output_dim_mismatch(self):
        full, _ = gen_model3(50, 4)
        with pytest.raises(ValueError, match="bins"):
            fit_estimator(full, even_partition(-4, 4, 5),
                          NetworkConfig(1, 4, hidden_sizes=()), TrainConfig())


class TestSerialization:
    def test_estimator_round_trip(self):
        est = random_estimator(21)
        back = DensityEstimator.from_json(est.to_json())
        x, y = [0.4, 0.1], 0.6
        assert back.pdf(x, y) == est.pdf(x, y)
        assert back.cdf(x, y) == est.cdf(x, y)

    def test_ensemble_round_trip(self):
        ens = EnsembleEstimator([random_estimator(s) for s in range(3)])
        back = EnsembleEstimator.from_json(ens.to_json())
        assert back.k == 3
        assert back.cdf([0.1, 0.1], 0.3) == pytest.approx(ens.cdf([0.1, 0.1], 0.3))
