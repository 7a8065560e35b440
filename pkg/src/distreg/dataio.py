"""CSV ingestion, calendar feature engineering, and rolling-origin evaluation.

The rolling harness trains on an expanding historical window and scores
on the period immediately after it, fold by fold, optionally comparing
two model recipes via per-fold relative score changes.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .data import Dataset
from .scoring import ScoreReport, score_testset

DAYS_PER_YEAR = 365.25


class DataIOError(ValueError):
    """CSV schema or parse failure."""


@dataclass(frozen=True)
class TableSchema:
    target: str
    numeric: tuple[str, ...] = ()
    categorical: tuple[str, ...] = ()
    timestamp: str | None = None
    bounds: tuple[float, float] | None = None  # declared response range, if bounded

    def __post_init__(self):
        object.__setattr__(self, "numeric", tuple(self.numeric))
        object.__setattr__(self, "categorical", tuple(self.categorical))
        names = [self.target, *self.numeric, *self.categorical]
        if self.timestamp:
            names.append(self.timestamp)
        if len(set(names)) != len(names):
            raise DataIOError(f"duplicate column names in schema: {names}")

    @classmethod
    def from_dict(cls, d: dict) -> "TableSchema":
        return cls(target=d["target"], numeric=tuple(d.get("numeric", ())),
                   categorical=tuple(d.get("categorical", ())),
                   timestamp=d.get("timestamp"),
                   bounds=tuple(d["bounds"]) if d.get("bounds") else None)


@dataclass
class LoadedTable:
    dataset: Dataset
    timestamps: list[datetime] | None = None
    schema: TableSchema | None = None

    def with_calendar_features(self) -> "LoadedTable":
        if self.timestamps is None:
            raise DataIOError("no timestamp column was loaded")
        feats, names = calendar_features(self.timestamps)
        ds = Dataset(np.hstack([self.dataset.X, feats]), self.dataset.y,
                     feature_names=self.dataset.columns() + names)
        return LoadedTable(ds, self.timestamps, self.schema)


def load_csv(path, schema: TableSchema) -> LoadedTable:
    """Parse a header CSV into covariates and response per the schema.

    Categorical columns expand to one-hot indicators ordered by first
    appearance. Missing or non-numeric values are rejected with their
    line number.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataIOError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        col = {name: i for i, name in enumerate(header)}
        needed = [schema.target, *schema.numeric, *schema.categorical]
        if schema.timestamp:
            needed.append(schema.timestamp)
        for name in needed:
            if name not in col:
                raise DataIOError(f"{path}: missing column {name!r}")

        ys, rows, cat_rows, stamps = [], [], [], []
        cat_levels: dict[str, list[str]] = {c: [] for c in schema.categorical}
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(v.strip() == "" for v in rec):
                continue
            if len(rec) != len(header):
                raise DataIOError(f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}")
            vals = []
            for name in (schema.target, *schema.numeric):
                raw = rec[col[name]].strip()
                try:
                    v = float(raw)
                except ValueError:
                    v = math.nan
                if not math.isfinite(v):
                    raise DataIOError(f"{path}:{lineno}: non-numeric value {raw!r} in column {name!r}")
                vals.append(v)
            ys.append(vals[0])
            rows.append(vals[1:])
            levels = []
            for name in schema.categorical:
                raw = rec[col[name]].strip()
                if raw == "":
                    raise DataIOError(f"{path}:{lineno}: missing value in column {name!r}")
                if raw not in cat_levels[name]:
                    cat_levels[name].append(raw)
                levels.append(raw)
            cat_rows.append(levels)
            if schema.timestamp:
                raw = rec[col[schema.timestamp]].strip()
                try:
                    stamps.append(datetime.fromisoformat(raw))
                except ValueError:
                    raise DataIOError(f"{path}:{lineno}: unparseable timestamp {raw!r}") from None

    if not ys:
        raise DataIOError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=float).reshape(len(ys), len(schema.numeric))
    names = list(schema.numeric)
    for ci, cname in enumerate(schema.categorical):
        onehot = np.zeros((len(ys), len(cat_levels[cname])))
        for r, levels in enumerate(cat_rows):
            onehot[r, cat_levels[cname].index(levels[ci])] = 1.0
        X = np.hstack([X, onehot])
        names += [f"{cname}_{lvl}" for lvl in cat_levels[cname]]
    ds = Dataset(X, np.asarray(ys), feature_names=names)
    return LoadedTable(ds, stamps if schema.timestamp else None, schema)


def calendar_features(timestamps) -> tuple[np.ndarray, list[str]]:
    """Seasonal sin/cos of the day of year plus 24 hour-of-day indicators."""
    n = len(timestamps)
    feats = np.zeros((n, 2 + 24))
    for i, ts in enumerate(timestamps):
        day = (ts.timetuple().tm_yday - 1
               + (ts.hour * 3600 + ts.minute * 60 + ts.second) / 86400.0)
        ang = 2 * math.pi * day / DAYS_PER_YEAR
        feats[i, 0] = math.sin(ang)
        feats[i, 1] = math.cos(ang)
        feats[i, 2 + ts.hour] = 1.0
    names = ["doy_sin", "doy_cos"] + [f"hour_{h}" for h in range(24)]
    return feats, names


@dataclass(frozen=True)
class RollingPlan:
    """Expanding-window fold boundaries as (train_end, test_end) row indices.

    Fold i trains on rows [0, train_end) and tests on
    [train_end, test_end); each train window ends exactly where the
    previous fold's test span ended.
    """
    folds: tuple[tuple[int, int], ...]

    def __post_init__(self):
        folds = tuple((int(a), int(b)) for a, b in self.folds)
        object.__setattr__(self, "folds", folds)
        if not folds:
            raise DataIOError("plan has no folds")
        prev_end = None
        for a, b in folds:
            if not 0 < a < b:
                raise DataIOError(f"invalid fold boundaries ({a}, {b})")
            if prev_end is not None and a != prev_end:
                raise DataIOError("folds must be consecutive: each train window "
                                  "ends where the previous test span ended")
            prev_end = b

    @property
    def n_folds(self) -> int:
        return len(self.folds)


def monthly_plan(timestamps, initial_months: int = 12, n_folds: int = 12) -> RollingPlan:
    """Fold boundaries at calendar-month edges of a time-sorted series."""
    months = [(ts.year, ts.month) for ts in timestamps]
    if months != sorted(months):
        raise DataIOError("timestamps must be sorted in time")
    uniq = sorted(set(months))
    if len(uniq) < initial_months + n_folds:
        raise DataIOError(f"need at least {initial_months + n_folds} distinct months, have {len(uniq)}")
    # first row index of each month, plus the total length as a sentinel
    starts = {}
    for i, m in enumerate(months):
        starts.setdefault(m, i)
    bounds = [starts[m] for m in uniq] + [len(months)]
    folds = [(bounds[initial_months + j], bounds[initial_months + j + 1])
             for j in range(n_folds)]
    return RollingPlan(tuple(folds))


def rows_plan(initial_rows: int, test_rows: int, n_folds: int) -> RollingPlan:
    """Row-count plan for data without timestamps."""
    folds = [(initial_rows + j * test_rows, initial_rows + (j + 1) * test_rows)
             for j in range(n_folds)]
    return RollingPlan(tuple(folds))


@dataclass
class RollingResult:
    reports_a: list[ScoreReport]
    reports_b: list[ScoreReport] | None = None
    relative_change: dict[str, float] = field(default_factory=dict)

    def aggregate(self) -> dict:
        agg = {
            "folds": len(self.reports_a),
            "crps": float(np.mean([r.crps for r in self.reports_a])),
            "aqtl": float(np.mean([r.aqtl for r in self.reports_a])),
            "coverage90": float(np.mean([r.coverage90 for r in self.reports_a])),
        }
        if self.relative_change:
            agg["relative_change"] = self.relative_change
        return agg

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fold", "n", "crps", "aqtl", "coverage90"])
            for i, r in enumerate(self.reports_a, start=1):
                w.writerow([i, r.n, r.crps, r.aqtl, r.coverage90])

    def to_json(self) -> str:
        return json.dumps(self.aggregate())


def relative_change(per_fold_a, per_fold_b) -> float:
    """Mean over folds of (a - b) / b."""
    a = np.asarray(per_fold_a, dtype=float)
    b = np.asarray(per_fold_b, dtype=float)
    return float(np.mean((a - b) / b))


def rolling_eval(data: Dataset, plan: RollingPlan, recipe,
                 recipe_b=None, timestamps=None) -> RollingResult:
    """Expanding-window evaluation of one or two model recipes.

    A recipe is a callable Dataset -> fitted estimator. With two
    recipes, per-fold relative CRPS/AQTL changes of A vs B are averaged
    across folds.
    """
    if timestamps is not None:
        if list(timestamps) != sorted(timestamps):
            raise DataIOError("data must be sorted in time")
        if len(timestamps) != len(data):
            raise DataIOError("timestamps length does not match data")
    reports_a, reports_b = [], []
    for train_end, test_end in plan.folds:
        if test_end > len(data):
            raise DataIOError(f"fold boundary {test_end} exceeds data length {len(data)}")
        if test_end == train_end:
            raise DataIOError("empty test fold")
        if timestamps is not None and timestamps[train_end - 1] >= timestamps[train_end]:
            raise DataIOError("temporal leakage: train window overlaps test span")
        train = Dataset(data.X[:train_end], data.y[:train_end], data.feature_names)
        test = Dataset(data.X[train_end:test_end], data.y[train_end:test_end], data.feature_names)
        reports_a.append(score_testset(recipe(train), test))
        if recipe_b is not None:
            reports_b.append(score_testset(recipe_b(train), test))
    rel = {}
    if recipe_b is not None:
        rel = {
            "crps": relative_change([r.crps for r in reports_a], [r.crps for r in reports_b]),
            "aqtl": relative_change([r.aqtl for r in reports_a], [r.aqtl for r in reports_b]),
        }
    return RollingResult(reports_a, reports_b if recipe_b is not None else None, rel)
