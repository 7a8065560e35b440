"""Proper scoring rules for predictive distributions.

CRPS is approximated on an even grid over the estimation range and
normalized by that range; the quantile (pinball) loss is averaged over
the 99 percentiles to give AQTL. All functions are pure.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

DEFAULT_GRID_POINTS = 1000
PERCENTILE_TAUS = np.arange(1, 100) / 100.0


@dataclass
class ScoreReport:
    crps: float
    aqtl: float
    coverage90: float
    per_quantile: dict[float, float]
    n: int
    n_clamped: int = 0

    def __post_init__(self):
        vals = [self.crps, self.aqtl, self.coverage90, *self.per_quantile.values()]
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise ValueError("scores must be finite and nonnegative")
        if not 0 <= self.coverage90 <= 1:
            raise ValueError(f"coverage must lie in [0, 1], got {self.coverage90}")

    def to_dict(self) -> dict:
        return {"n": self.n, "crps": self.crps, "aqtl": self.aqtl,
                "coverage90": self.coverage90, "n_clamped": self.n_clamped,
                "per_quantile": {f"{tau:.2f}": v for tau, v in self.per_quantile.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def write_csv(self, path) -> None:
        """One-row CSV: n, crps, aqtl, coverage90, qtl_01..qtl_99."""
        taus = sorted(self.per_quantile)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "crps", "aqtl", "coverage90",
                        *(f"qtl_{round(t * 100):02d}" for t in taus)])
            w.writerow([self.n, self.crps, self.aqtl, self.coverage90,
                        *(self.per_quantile[t] for t in taus)])


def crps(predictive_cdf, y_obs: float, lower: float, upper: float,
         grid_points: int = DEFAULT_GRID_POINTS) -> float:
    """Range-normalized squared integral of (CDF - observation step).

    The integral is a mean over grid_points evenly spaced points on
    [lower, upper]; predictive_cdf must accept an array of y values.
    Observations outside the range are clamped to it.
    """
    if not lower < upper:
        raise ValueError(f"lower ({lower}) must be < upper ({upper})")
    if grid_points < 2:
        raise ValueError(f"need at least 2 grid points, got {grid_points}")
    grid = np.linspace(lower, upper, grid_points)
    yc = min(max(y_obs, lower), upper)
    F = np.asarray(predictive_cdf(grid), dtype=float)
    return float(np.mean((F - (grid >= yc)) ** 2))


def qtl(q_hat, y_obs, tau) -> float:
    """Pinball loss of a single quantile prediction."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0) or np.any(tau >= 1):
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    q_hat = np.asarray(q_hat, dtype=float)
    y_obs = np.asarray(y_obs, dtype=float)
    val = (y_obs - q_hat) * (tau - (y_obs <= q_hat))
    return float(val) if val.ndim == 0 else val


def aqtl(quantile_fn, y_obs: float) -> float:
    """Pinball loss averaged over the 99 percentiles 0.01..0.99.

    quantile_fn may be vectorized over tau or accept scalars.
    """
    try:
        qs = np.asarray(quantile_fn(PERCENTILE_TAUS), dtype=float)
        if qs.shape != PERCENTILE_TAUS.shape:
            raise TypeError
    except TypeError:
        qs = np.array([quantile_fn(t) for t in PERCENTILE_TAUS])
    return float(np.mean(qtl(qs, y_obs, PERCENTILE_TAUS)))


def coverage(intervals, ys) -> float:
    """Fraction of observations inside their (closed) predicted interval."""
    intervals = list(intervals)
    ys = np.asarray(ys, dtype=float)
    if len(intervals) != len(ys):
        raise ValueError(f"{len(intervals)} intervals but {len(ys)} observations")
    if len(ys) == 0:
        raise ValueError("empty input")
    lo = np.array([iv[0] for iv in intervals])
    hi = np.array([iv[1] for iv in intervals])
    return float(np.mean((lo <= ys) & (ys <= hi)))


def score_testset(estimator, test, grid_points: int = DEFAULT_GRID_POINTS,
                  level: float = 0.9) -> ScoreReport:
    """Average CRPS / pinball losses and 90% coverage over a test set.

    Works for any estimator exposing cdf_batch and quantile_batch over a
    shared response range (single estimators and ensembles alike).
    Test responses outside [lower, upper] are clamped for scoring and
    counted in the report.
    """
    if len(test) == 0:
        raise ValueError("empty test set")
    l, u = estimator.lower, estimator.upper
    ys = test.y
    n_clamped = int(np.sum((ys < l) | (ys > u)))
    yc = np.clip(ys, l, u)

    grid = np.linspace(l, u, grid_points)
    F = estimator.cdf_batch(test.X, grid)  # (n, grid)
    step = grid[None, :] >= yc[:, None]
    crps_vals = np.mean((F - step) ** 2, axis=1)

    Q = estimator.quantile_batch(test.X, PERCENTILE_TAUS)  # (n, 99)
    pin = (ys[:, None] - Q) * (PERCENTILE_TAUS[None, :] - (ys[:, None] <= Q))
    per_quantile = {float(t): float(v) for t, v in zip(PERCENTILE_TAUS, pin.mean(axis=0))}

    lo_hi = estimator.quantile_batch(test.X, np.array([(1 - level) / 2, (1 + level) / 2]))
    cov = float(np.mean((lo_hi[:, 0] <= ys) & (ys <= lo_hi[:, 1])))

    return ScoreReport(crps=float(crps_vals.mean()), aqtl=float(pin.mean()),
                       coverage90=cov, per_quantile=per_quantile,
                       n=len(test), n_clamped=n_clamped)
