"""Command-line entry point: simulate | fit | predict | score | rolling | experiment.

Configuration files are JSON mirroring the dataclass fields of the
owning modules; command-line flags override file values. All CSV output
is UTF-8 with a header row and "." decimals.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .data import Dataset
from .dataio import (LoadedTable, RollingPlan, TableSchema, load_csv, monthly_plan,
                     rows_plan, rolling_eval)
from .estimator import DensityEstimator, EnsembleEstimator, fit_ensemble, fit_estimator
from .nn import NetworkConfig, TrainConfig
from .partition import even_partition, random_partition
from .scoring import score_testset
from .simgen import generate, training_range
from .experiments import (ConsistencySpec, ExperimentSpec, fit_cell, run_consistency,
                          run_grid, write_consistency_csv, write_grid_csv)


class CliError(ValueError):
    pass


def _default_schema(path) -> TableSchema:
    """Schema for simulate-style CSVs: target y, every other column numeric."""
    with open(path, newline="") as fh:
        header = next(csv.reader(fh))
    header = [h.strip() for h in header]
    if "y" not in header:
        raise CliError(f"{path}: no 'y' column; pass an explicit schema")
    return TableSchema(target="y", numeric=tuple(h for h in header if h != "y"))


def _load_table(data_path, schema_path=None, calendar=False) -> LoadedTable:
    if schema_path:
        with open(schema_path) as fh:
            schema = TableSchema.from_dict(json.load(fh))
    else:
        schema = _default_schema(data_path)
    table = load_csv(data_path, schema)
    if calendar:
        table = table.with_calendar_features()
    return table


def _load_model(path):
    with open(path) as fh:
        d = json.load(fh)
    if "members" in d:
        return EnsembleEstimator.from_dict(d)
    return DensityEstimator.from_dict(d)


def _fit_from_config(train: Dataset, cfg: dict, seed_override=None, bounds=None):
    part_cfg = cfg.get("partition", {})
    kind = part_cfg.get("kind", "even")
    m = int(part_cfg.get("m", 40))
    k = int(part_cfg.get("K", 1))
    seed = seed_override if seed_override is not None else int(cfg.get("seed", 0))
    if bounds is None:
        bounds = cfg.get("bounds")
    lower, upper = map(float, bounds) if bounds else training_range(train.y)
    net_kwargs = dict(cfg.get("network", {}))
    net_kwargs.setdefault("hidden_sizes", (100, 100, 100))
    net_kwargs.setdefault("dropout_rate", 0.5)
    net_cfg = NetworkConfig(input_dim=train.n_features, output_dim=m + 1,
                            hidden_sizes=tuple(net_kwargs["hidden_sizes"]),
                            dropout_rate=float(net_kwargs["dropout_rate"]),
                            activation=net_kwargs.get("activation", "elu"))
    train_cfg = TrainConfig(seed=seed, **cfg.get("train", {}))
    if kind == "even" and k == 1:
        return fit_estimator(train, even_partition(lower, upper, m), net_cfg, train_cfg)
    if kind == "random" and k == 1:
        part = random_partition(lower, upper, m, seed)
        return fit_estimator(train, part, net_cfg, train_cfg)
    if kind in ("random", "ensemble"):
        return fit_ensemble(train, lower, upper, m, k, net_cfg, train_cfg, seed)
    raise CliError(f"unsupported partition settings: kind={kind!r}, K={k}")


def cmd_simulate(args) -> int:
    data, _ = generate(args.model, args.n, args.seed)
    data.write_csv(args.out)
    if not args.quiet:
        print(f"wrote {len(data)} rows to {args.out}")
    return 0


def cmd_fit(args) -> int:
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    table = _load_table(args.data, args.schema, args.calendar)
    bounds = table.schema.bounds if table.schema else None
    est = _fit_from_config(table.dataset, cfg, seed_override=args.seed, bounds=bounds)
    with open(args.out, "w") as fh:
        fh.write(est.to_json())
    report = score_testset(est, table.dataset)
    if not args.quiet:
        print(f"wrote model to {args.out}; training-set CRPS {report.crps:.6f}")
    return 0


def cmd_predict(args) -> int:
    est = _load_model(args.model)
    table = _load_table(args.data, args.schema, args.calendar)
    n_feat = table.dataset.n_features
    want = (est.members[0] if isinstance(est, EnsembleEstimator) else est).network.config.input_dim
    if n_feat != want:
        raise CliError(f"model expects {want} features but data has {n_feat}")
    taus = sorted(float(t) for t in args.taus.split(","))
    X = table.dataset.X
    Q = est.quantile_batch(X, np.asarray(taus))
    I = est.quantile_batch(X, np.array([0.05, 0.95]))
    header = [f"q{round(t * 100):02d}" for t in taus] + ["lo90", "hi90"]
    dens = None
    if args.density:
        grid = np.linspace(est.lower, est.upper, args.density_points)
        # centered-difference density from the CDF on the evaluation grid
        h = grid[1] - grid[0]
        Fp = est.cdf_batch(X, np.clip(grid + h / 2, est.lower, est.upper))
        Fm = est.cdf_batch(X, np.clip(grid - h / 2, est.lower, est.upper))
        dens = (Fp - Fm) / h
        header += [f"d{j + 1:03d}" for j in range(args.density_points)]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(len(X)):
            row = [*Q[i], I[i, 0], I[i, 1]]
            if dens is not None:
                row += list(dens[i])
            w.writerow(row)
    if not args.quiet:
        print(f"wrote predictions for {len(X)} rows to {args.out}")
    return 0


def cmd_score(args) -> int:
    est = _load_model(args.model)
    table = _load_table(args.data, args.schema, args.calendar)
    report = score_testset(est, table.dataset)
    print(report.to_json())
    if args.out:
        report.write_csv(args.out)
    return 0


def cmd_rolling(args) -> int:
    table = _load_table(args.data, args.schema, args.calendar)
    with open(args.plan) as fh:
        plan_cfg = json.load(fh)
    if "folds" in plan_cfg:
        plan = RollingPlan(tuple(tuple(f) for f in plan_cfg["folds"]))
    elif table.timestamps is not None:
        plan = monthly_plan(table.timestamps,
                            initial_months=int(plan_cfg.get("initial_months", 12)),
                            n_folds=int(plan_cfg.get("n_folds", 12)))
    else:
        plan = rows_plan(int(plan_cfg["initial_rows"]), int(plan_cfg["test_rows"]),
                         int(plan_cfg.get("n_folds", 12)))
    with open(args.recipe) as fh:
        cfg_a = json.load(fh)
    bounds = table.schema.bounds if table.schema else None

    def recipe(cfg):
        return lambda train: _fit_from_config(train, cfg, seed_override=args.seed,
                                              bounds=bounds)

    recipe_b = None
    if args.recipe_b:
        with open(args.recipe_b) as fh:
            recipe_b = recipe(json.load(fh))
    result = rolling_eval(table.dataset, plan, recipe(cfg_a), recipe_b,
                          timestamps=table.timestamps)
    result.write_csv(args.out)
    agg = result.to_json()
    if args.aggregate:
        with open(args.aggregate, "w") as fh:
            fh.write(agg)
    if not args.quiet:
        print(agg)
    return 0


def cmd_experiment(args) -> int:
    with open(args.spec) as fh:
        spec_cfg = json.load(fh)
    kind = spec_cfg.pop("kind", "grid")
    if args.seed is not None:
        spec_cfg["master_seed" if kind == "grid" else "seed"] = args.seed
    for key in ("bin_counts", "losses", "classifiers", "ensemble_ks",
                "hidden_sizes", "sample_sizes"):
        if key in spec_cfg:
            spec_cfg[key] = tuple(spec_cfg[key])
    if kind == "grid":
        rows = run_grid(ExperimentSpec(**spec_cfg))
        write_grid_csv(rows, args.out)
        failed = [r for r in rows if r["status"] != "ok"]
        if not args.quiet:
            print(f"wrote {len(rows)} rows to {args.out}; {len(failed)} failed cells")
        if failed:
            print(json.dumps({"error": "failed cells",
                              "cells": [r["status"] for r in failed]}), file=sys.stderr)
            return 1
        return 0
    if kind == "consistency":
        rows = run_consistency(ConsistencySpec(**spec_cfg))
        write_consistency_csv(rows, args.out)
        if not args.quiet:
            print(f"wrote {len(rows)} rows to {args.out}")
        return 0
    raise CliError(f"unknown experiment kind {kind!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--quiet", action="store_true")

    data_opts = argparse.ArgumentParser(add_help=False)
    data_opts.add_argument("--schema", default=None, help="JSON table schema")
    data_opts.add_argument("--calendar", action="store_true",
                           help="append seasonal/hour features from the timestamp column")

    p = argparse.ArgumentParser(prog="distreg",
                                description="conditional distribution regression toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", parents=[common])
    sp.add_argument("--model", type=int, required=True, choices=(1, 2, 3, 4))
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_simulate, need_out=True, default_seed=0)

    sp = sub.add_parser("fit", parents=[common, data_opts])
    sp.add_argument("--data", required=True)
    sp.set_defaults(func=cmd_fit, need_out=True)

    sp = sub.add_parser("predict", parents=[common, data_opts])
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.add_argument("--taus", default="0.05,0.5,0.95")
    sp.add_argument("--density", action="store_true")
    sp.add_argument("--density-points", type=int, default=100)
    sp.set_defaults(func=cmd_predict, need_out=True)

    sp = sub.add_parser("score", parents=[common, data_opts])
    sp.add_argument("--model", required=True)
    sp.add_argument("--data", required=True)
    sp.set_defaults(func=cmd_score, need_out=False)

    sp = sub.add_parser("rolling", parents=[common, data_opts])
    sp.add_argument("--data", required=True)
    sp.add_argument("--plan", required=True)
    sp.add_argument("--recipe", required=True)
    sp.add_argument("--recipe-b", default=None)
    sp.add_argument("--aggregate", default=None)
    sp.set_defaults(func=cmd_rolling, need_out=True)

    sp = sub.add_parser("experiment", parents=[common])
    sp.add_argument("--spec", required=True)
    sp.set_defaults(func=cmd_experiment, need_out=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "need_out", False) and not args.out:
        print(json.dumps({"error": "--out is required for this subcommand"}), file=sys.stderr)
        return 2
    if args.seed is None and hasattr(args, "default_seed"):
        args.seed = args.default_seed
    try:
        return args.func(args)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
