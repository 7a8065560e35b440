"""Conditional density / CDF / quantile predictors built on binned classifiers.

A DensityEstimator pairs a Partition with a trained softmax classifier:
the density is piecewise constant (bin mass over bin width), the CDF is
its integral (piecewise linear), and quantiles invert the CDF exactly.
An EnsembleEstimator averages K such estimators, each fitted on its own
random partition of the same range, which smooths the density.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .nn import Network, NetworkConfig, TrainConfig, forward, init_network, train
from .partition import Partition, random_partition

ENSEMBLE_QUANTILE_TOL = 1e-9


@dataclass
class DensityEstimator:
    partition: Partition
    network: Network

    def __post_init__(self):
        if self.network.config.output_dim != self.partition.n_bins:
            raise ValueError(
                f"classifier has {self.network.config.output_dim} outputs but the "
                f"partition has {self.partition.n_bins} bins")

    @property
    def lower(self) -> float:
        return self.partition.lower

    @property
    def upper(self) -> float:
        return self.partition.upper

    def bin_probs(self, x) -> np.ndarray:
        """Eval-mode class probabilities for one covariate vector or a batch."""
        return forward(self.network, x)

    def pdf(self, x, y: float) -> float:
        k = self.partition.bin_index(y)  # raises on out-of-range y
        p = self.bin_probs(x)
        return float(p[k - 1] / self.partition.widths[k - 1])

    def cdf(self, x, y):
        P = self.bin_probs(np.asarray(x, dtype=float))[None, :]
        vals = self._cdf_from_probs(P, np.atleast_1d(np.asarray(y, dtype=float)))[0]
        return float(vals[0]) if np.ndim(y) == 0 else vals

    def _cum_knots(self, P: np.ndarray) -> np.ndarray:
        """Per-row CDF values at the m+2 partition edges, starting at 0."""
        C = np.zeros((P.shape[0], P.shape[1] + 1))
        np.cumsum(P, axis=1, out=C[:, 1:])
        C[:, -1] = 1.0
        return C

    def _cdf_from_probs(self, P: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Piecewise-linear CDF; values outside [l, u] clamp to 0/1.

        P is (n, m+1); ys is (q,) shared across rows or (n, q) per row.
        Returns (n, q).
        """
        e = self.partition.edges
        yc = np.clip(np.asarray(ys, dtype=float), e[0], e[-1])
        k = np.clip(np.searchsorted(e, yc, side="right"), 1, len(e) - 1)
        C = self._cum_knots(P)
        rows = np.arange(P.shape[0])[:, None]
        if yc.ndim == 1:
            yc = np.broadcast_to(yc, (P.shape[0], yc.shape[0]))
            k = np.broadcast_to(k, yc.shape)
        frac = (yc - e[k - 1]) / (e[k] - e[k - 1])
        return C[rows, k - 1] + P[rows, k - 1] * frac

    def cdf_batch(self, X, ys) -> np.ndarray:
        """CDF at ys for every row of X; returns (n_rows, n_ys)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._cdf_from_probs(self.bin_probs(X), np.asarray(ys, dtype=float))

    def quantile(self, x, tau):
        taus = np.atleast_1d(np.asarray(tau, dtype=float))
        if np.any(taus <= 0) or np.any(taus >= 1):
            raise ValueError(f"quantile levels must lie in (0, 1), got {taus}")
        C = self._cum_knots(self.bin_probs(np.asarray(x, dtype=float))[None, :])[0]
        q = np.interp(taus, C, self.partition.edges)
        return float(q[0]) if np.ndim(tau) == 0 else q

    def quantile_batch(self, X, taus) -> np.ndarray:
        """Quantiles at taus for every row of X; returns (n_rows, n_taus)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        taus = np.asarray(taus, dtype=float)
        if np.any(taus <= 0) or np.any(taus >= 1):
            raise ValueError("quantile levels must lie in (0, 1)")
        C = self._cum_knots(self.bin_probs(X))
        e = self.partition.edges
        return np.stack([np.interp(taus, C[i], e) for i in range(len(C))])

    def predict_interval(self, x, level: float = 0.9):
        if not 0 < level < 1:
            raise ValueError(f"interval level must lie in (0, 1), got {level}")
        lo, hi = self.quantile(x, np.array([(1 - level) / 2, (1 + level) / 2]))
        return float(lo), float(hi)

    def to_dict(self) -> dict:
        return {"partition": self.partition.to_dict(), "model": self.network.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "DensityEstimator":
        return cls(Partition.from_dict(d["partition"]), Network.from_dict(d["model"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "DensityEstimator":
        return cls.from_dict(json.loads(s))


@dataclass
class EnsembleEstimator:
    members: list[DensityEstimator]

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("ensemble needs at least one member")
        l, u = self.members[0].lower, self.members[0].upper
        for m in self.members[1:]:
            if (m.lower, m.upper) != (l, u):
                raise ValueError("all ensemble members must share the same response range")

    @property
    def lower(self) -> float:
        return self.members[0].lower

    @property
    def upper(self) -> float:
        return self.members[0].upper

    @property
    def k(self) -> int:
        return len(self.members)

    def pdf(self, x, y: float) -> float:
        return float(np.mean([m.pdf(x, y) for m in self.members]))

    def cdf(self, x, y):
        vals = np.mean([np.atleast_1d(m.cdf(x, y)) for m in self.members], axis=0)
        return float(vals[0]) if np.ndim(y) == 0 else vals

    def cdf_batch(self, X, ys) -> np.ndarray:
        return np.mean([m.cdf_batch(X, ys) for m in self.members], axis=0)

    def quantile_batch(self, X, taus) -> np.ndarray:
        """Invert the averaged CDF by bisection, vectorized over rows and taus."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        taus = np.asarray(taus, dtype=float)
        if np.any(taus <= 0) or np.any(taus >= 1):
            raise ValueError("quantile levels must lie in (0, 1)")
        probs = [m.bin_probs(X) for m in self.members]

        def avg_cdf(Y):
            return np.mean([m._cdf_from_probs(p, Y) for m, p in zip(self.members, probs)], axis=0)

        lo = np.full((X.shape[0], taus.size), self.lower)
        hi = np.full_like(lo, self.upper)
        target = np.broadcast_to(taus, lo.shape)
        while np.max(hi - lo) > ENSEMBLE_QUANTILE_TOL:
            mid = 0.5 * (lo + hi)
            below = avg_cdf(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def quantile(self, x, tau):
        q = self.quantile_batch(np.atleast_2d(np.asarray(x, dtype=float)),
                                np.atleast_1d(np.asarray(tau, dtype=float)))[0]
        return float(q[0]) if np.ndim(tau) == 0 else q

    def predict_interval(self, x, level: float = 0.9):
        if not 0 < level < 1:
            raise ValueError(f"interval level must lie in (0, 1), got {level}")
        lo, hi = self.quantile(x, np.array([(1 - level) / 2, (1 + level) / 2]))
        return float(lo), float(hi)

    def to_dict(self) -> dict:
        return {"members": [m.to_dict() for m in self.members],
                "lower": self.lower, "upper": self.upper}

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleEstimator":
        return cls([DensityEstimator.from_dict(m) for m in d["members"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "EnsembleEstimator":
        return cls.from_dict(json.loads(s))


def fit_estimator(data: Dataset, partition: Partition,
                  net_cfg: NetworkConfig, train_cfg: TrainConfig) -> DensityEstimator:
    """Label responses by bin, train the classifier, return the pair."""
    if len(data) == 0:
        raise ValueError("cannot fit on an empty dataset")
    bad = np.nonzero((data.y < partition.lower) | (data.y > partition.upper))[0]
    if bad.size:
        raise ValueError(
            f"{bad.size} response(s) outside [{partition.lower}, {partition.upper}] "
            f"at rows {bad[:10].tolist()}")
    if net_cfg.input_dim != data.n_features:
        raise ValueError(f"network expects {net_cfg.input_dim} features, data has {data.n_features}")
    if net_cfg.output_dim != partition.n_bins:
        raise ValueError(f"network has {net_cfg.output_dim} outputs, partition has {partition.n_bins} bins")
    labels = partition.bin_index(data.y)
    net = init_network(net_cfg, train_cfg.seed)
    net, _ = train(net, data.X, labels, train_cfg)
    return DensityEstimator(partition, net)


def member_seeds(seed, k: int) -> list[np.random.SeedSequence]:
    """Independent child seed streams, one per ensemble member."""
    return np.random.SeedSequence(seed).spawn(k)


def fit_ensemble(data: Dataset, lower: float, upper: float, m: int, k: int,
                 net_cfg: NetworkConfig, train_cfg: TrainConfig, seed,
                 min_width_fraction: float | None = None) -> EnsembleEstimator:
    """K independently trained estimators on independent random partitions.

    Each member gets its own seed stream derived from the master seed, so
    the result is identical however the members are scheduled.
    """
    if k < 1:
        raise ValueError(f"ensemble size must be >= 1, got {k}")
    members = []
    for child in member_seeds(seed, k):
        part_seed, net_seed = child.spawn(2)
        part = random_partition(lower, upper, m, part_seed, min_width_fraction)
        cfg_k = TrainConfig(loss=train_cfg.loss, epochs=train_cfg.epochs,
                            batch_size=train_cfg.batch_size,
                            learning_rate=train_cfg.learning_rate,
                            adam_beta1=train_cfg.adam_beta1,
                            adam_beta2=train_cfg.adam_beta2,
                            adam_eps=train_cfg.adam_eps,
                            seed=net_seed.generate_state(1)[0],
                            log_clip_eps=train_cfg.log_clip_eps)
        members.append(fit_estimator(data, part, net_cfg, cfg_k))
    return EnsembleEstimator(members)
