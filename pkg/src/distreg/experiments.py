"""Simulation study drivers: configuration grids and the consistency sweep.

run_grid sweeps loss function x classifier depth x bin count x ensemble
size over replicated synthetic datasets and records proper scores per
cell. run_consistency fits multinomial logistic regression with an
n-dependent number of even bins on a one-feature model with analytic
truth and tracks the integrated squared error of the density estimate
as the sample size grows.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .estimator import DensityEstimator, fit_ensemble, fit_estimator
from .nn import NetworkConfig, TrainConfig
from .partition import even_partition
from .scoring import score_testset
from .simgen import generate, training_range

GRID_CSV_COLUMNS = ["model", "replicate", "loss", "classifier", "bins",
                    "ensembleK", "crps", "aqtl", "coverage90", "wall_seconds", "status"]

DEEP_HIDDEN = (100, 100, 100)
DEEP_DROPOUT = 0.5


@dataclass(frozen=True)
class ExperimentSpec:
    model_id: int
    replicates: int = 10
    n_train: int = 2000
    n_test: int = 1000
    bin_counts: tuple[int, ...] = (10, 40, 160)
    losses: tuple[str, ...] = ("multinomial", "jbce")
    classifiers: tuple[str, ...] = ("deep", "logistic")
    ensemble_ks: tuple[int, ...] = (1,)
    master_seed: int = 0
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    hidden_sizes: tuple[int, ...] = DEEP_HIDDEN
    dropout_rate: float = DEEP_DROPOUT

    def __post_init__(self):
        if not 1 <= self.model_id <= 4:
            raise ValueError(f"model_id must be 1..4, got {self.model_id}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(b < 1 for b in self.bin_counts):
            raise ValueError("bin counts must be >= 1")


def fit_cell(train: Dataset, lower: float, upper: float, *, loss: str,
             classifier: str, bins: int, ensemble_k: int, seed,
             epochs: int, batch_size: int, learning_rate: float,
             hidden_sizes=DEEP_HIDDEN, dropout_rate=DEEP_DROPOUT):
    """Fit one grid configuration; bins counts bins, not cut-points."""
    if classifier == "deep":
        hidden, dropout = tuple(hidden_sizes), dropout_rate
    elif classifier == "logistic":
        hidden, dropout = (), 0.0
    else:
        raise ValueError(f"classifier must be 'deep' or 'logistic', got {classifier!r}")
    net_cfg = NetworkConfig(input_dim=train.n_features, output_dim=bins,
                            hidden_sizes=hidden, dropout_rate=dropout)
    if isinstance(seed, np.random.SeedSequence):
        seed = int(seed.generate_state(1)[0])
    train_cfg = TrainConfig(loss=loss, epochs=epochs, batch_size=batch_size,
                            learning_rate=learning_rate, seed=seed)
    if ensemble_k == 1:
        part = even_partition(lower, upper, bins - 1)
        return fit_estimator(train, part, net_cfg, train_cfg)
    return fit_ensemble(train, lower, upper, bins - 1, ensemble_k,
                        net_cfg, train_cfg, seed)


def run_grid(spec: ExperimentSpec) -> list[dict]:
    """One result row per replicate x configuration; failures are recorded
    in the status column, never silently dropped."""
    rows = []
    rep_seeds = np.random.SeedSequence(spec.master_seed).spawn(spec.replicates)
    for rep, rep_seed in enumerate(rep_seeds, start=1):
        data_seed, fit_root = rep_seed.spawn(2)
        full, _ = generate(spec.model_id, spec.n_train + spec.n_test, data_seed)
        train = Dataset(full.X[:spec.n_train], full.y[:spec.n_train])
        test = Dataset(full.X[spec.n_train:], full.y[spec.n_train:])
        lower, upper = training_range(train.y)
        configs = [(loss, clf, bins, k)
                   for loss in spec.losses for clf in spec.classifiers
                   for bins in spec.bin_counts for k in spec.ensemble_ks]
        fit_seeds = fit_root.spawn(len(configs))
        for (loss, clf, bins, k), fit_seed in zip(configs, fit_seeds):
            row = {"model": spec.model_id, "replicate": rep, "loss": loss,
                   "classifier": clf, "bins": bins, "ensembleK": k,
                   "crps": math.nan, "aqtl": math.nan, "coverage90": math.nan,
                   "wall_seconds": math.nan, "status": "ok"}
            start = time.perf_counter()
            try:
                est = fit_cell(train, lower, upper, loss=loss, classifier=clf,
                               bins=bins, ensemble_k=k, seed=fit_seed,
                               epochs=spec.epochs, batch_size=spec.batch_size,
                               learning_rate=spec.learning_rate,
                               hidden_sizes=spec.hidden_sizes,
                               dropout_rate=spec.dropout_rate)
                report = score_testset(est, test)
                row.update(crps=report.crps, aqtl=report.aqtl,
                           coverage90=report.coverage90)
            except Exception as exc:  # record, keep the grid going
                row["status"] = f"error: {exc}"
            row["wall_seconds"] = time.perf_counter() - start
            rows.append(row)
    return rows


def write_grid_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=GRID_CSV_COLUMNS)
        w.writeheader()
        w.writerows(rows)


# ---------------------------------------------------------------------------
# Consistency sweep


@dataclass(frozen=True)
class ConsistencySpec:
    sample_sizes: tuple[int, ...] = (1000, 4000, 16000)
    replicates: int = 5
    n_probes: int = 10
    seed: int = 0
    epochs: int = 100
    batch_size: int = 128
    learning_rate: float = 1e-2
    quad_points: int = 2000

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sample_sizes)
        object.__setattr__(self, "sample_sizes", sizes)
        if list(sizes) != sorted(sizes) or len(set(sizes)) != len(sizes):
            raise ValueError("sample sizes must be strictly increasing")


def bins_rule(n: int) -> int:
    """Bin count growing like n^(1/3): unbounded, but sublinear in n."""
    return math.ceil(n ** (1 / 3))


# one-feature location-scale truth: Y | X=x ~ N(SLOPE * x, NOISE_SD^2)
LS_SLOPE = 0.6
LS_NOISE_SD = 0.3
LS_RANGE = (-2.0, 2.0)


def gen_location_scale(n: int, seed) -> Dataset:
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=n)
    y = LS_SLOPE * x + LS_NOISE_SD * rng.standard_normal(n)
    # the range is fixed for the sweep; clip the vanishing tail mass outside it
    return Dataset(x[:, None], np.clip(y, *LS_RANGE))


def location_scale_pdf(x: float, ys: np.ndarray) -> np.ndarray:
    z = (np.asarray(ys, dtype=float) - LS_SLOPE * x) / LS_NOISE_SD
    return np.exp(-0.5 * z * z) / (LS_NOISE_SD * math.sqrt(2 * math.pi))


def estimator_pdf_grid(est: DensityEstimator, x, ys: np.ndarray) -> np.ndarray:
    """Piecewise-constant density of a fitted estimator on a y grid."""
    p = est.bin_probs(np.asarray(x, dtype=float))
    e = est.partition.edges
    k = np.clip(np.searchsorted(e, ys, side="right"), 1, len(e) - 1)
    return p[k - 1] / est.partition.widths[k - 1]


def integrated_squared_error(f_hat, f_true, lower: float, upper: float,
                             quad_points: int = 2000) -> float:
    """Quadrature of (f_hat - f_true)^2 over [lower, upper].

    Both arguments are callables over a y grid.
    """
    ys = np.linspace(lower, upper, quad_points)
    diff = np.asarray(f_hat(ys), dtype=float) - np.asarray(f_true(ys), dtype=float)
    return float(np.trapezoid(diff * diff, ys))


def run_consistency(spec: ConsistencySpec) -> list[dict]:
    """ISE of the logistic-regression density estimate per (n, replicate).

    Probe covariate values are fixed across the sweep; ISE is averaged
    over probes.
    """
    lower, upper = LS_RANGE
    probes = np.linspace(-0.9, 0.9, spec.n_probes)
    rows = []
    roots = np.random.SeedSequence(spec.seed).spawn(len(spec.sample_sizes))
    for n, root in zip(spec.sample_sizes, roots):
        n_bins = bins_rule(n)
        for rep, child in enumerate(root.spawn(spec.replicates), start=1):
            data_seed, fit_seed = child.spawn(2)
            data = gen_location_scale(n, data_seed)
            part = even_partition(lower, upper, n_bins - 1)
            net_cfg = NetworkConfig(input_dim=1, output_dim=n_bins,
                                    hidden_sizes=(), dropout_rate=0.0)
            train_cfg = TrainConfig(loss="multinomial", epochs=spec.epochs,
                                    batch_size=spec.batch_size,
                                    learning_rate=spec.learning_rate,
                                    seed=int(fit_seed.generate_state(1)[0]))
            est = fit_estimator(data, part, net_cfg, train_cfg)
            ise = float(np.mean([
                integrated_squared_error(
                    lambda ys, xv=xv: estimator_pdf_grid(est, [xv], ys),
                    lambda ys, xv=xv: location_scale_pdf(xv, ys),
                    lower, upper, spec.quad_points)
                for xv in probes]))
            rows.append({"n": n, "bins": n_bins, "replicate": rep, "ise": ise})
    return rows


def median_ise_by_n(rows: list[dict]) -> dict[int, float]:
    out = {}
    for n in sorted({r["n"] for r in rows}):
        out[n] = float(np.median([r["ise"] for r in rows if r["n"] == n]))
    return out


def write_consistency_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "bins", "replicate", "ise"])
        w.writeheader()
        w.writerows(rows)
