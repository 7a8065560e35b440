"""Tabular (covariates, response) container shared across modules."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass
class Dataset:
    X: np.ndarray  # (n, p)
    y: np.ndarray  # (n,)
    feature_names: list[str] | None = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float)
        if self.X.shape[0] != len(self.y):
            raise ValueError(f"X has {self.X.shape[0]} rows but y has {len(self.y)}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite entries")
        if self.feature_names is not None and len(self.feature_names) != self.X.shape[1]:
            raise ValueError("feature_names length does not match column count")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def columns(self) -> list[str]:
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"x{j + 1}" for j in range(self.n_features)]

    def write_csv(self, path) -> None:
        """CSV with header row y,x1,...,xp (or the stored feature names)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y", *self.columns()])
            for yi, row in zip(self.y, self.X):
                w.writerow([repr(float(yi)), *(repr(float(v)) for v in row)])
