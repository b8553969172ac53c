"""Command-line entry point: experiment grid, standalone scoring, CSV export."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np
import pandas as pd

from .data import (
    SCHEMAS,
    DataError,
    TabularDataset,
    export_clean_csv,
    load_clean_csv,
    load_dataset,
)
from .metrics import PredictionSet, full_report
from .runner import ExperimentManifest, RunnerError, run_grid


def resolve_dataset(value: str, data_dir: str) -> tuple[str, TabularDataset]:
    """A dataset argument is either a built-in schema name (file expected at
    <data_dir>/<name>.csv) or a path to a cleaned row_id,label,f0.. CSV."""
    if value in SCHEMAS:
        path = os.path.join(data_dir, f"{value}.csv")
        return value, load_dataset(path, SCHEMAS[value])
    if os.path.exists(value):
        name = os.path.splitext(os.path.basename(value))[0]
        if name in SCHEMAS:
            return name, load_dataset(value, SCHEMAS[name])
        return name, load_clean_csv(value, name)
    raise DataError(f"unknown dataset name or missing file: {value}")


def cmd_run(args) -> int:
    datasets = tuple(
        resolve_dataset(v.strip(), args.data_dir)
        for v in args.dataset.split(",")
    )
    config_ids = tuple(
        c.strip() for c in args.configs.split(",") if c.strip()
    ) if args.configs else ()
    baseline = args.baseline
    if baseline == "none":
        baseline = ""
    weighting = "mass_weighted" if args.ece_weighting == "mass" else "bin_mean"
    manifest = ExperimentManifest(
        datasets=datasets,
        feature_source=args.features,
        config_ids=config_ids,
        baseline=baseline,
        seed=args.seed,
        output_dir=args.out,
        n_bins=args.bins,
        ece_weighting=weighting,
    )
    tables = run_grid(manifest)
    for table in tables:
        print(table.format_table())
        print()
    print(f"artifacts written to {manifest.output_dir}")
    return 0


def cmd_metrics(args) -> int:
    probs = pd.read_csv(args.probs)
    labels = pd.read_csv(args.labels)
    if not {"row_id", "p_pos"} <= set(probs.columns):
        raise RunnerError("probability file must have columns row_id,p_pos")
    if not {"row_id", "label"} <= set(labels.columns):
        raise RunnerError("label file must have columns row_id,label")
    merged = probs.merge(labels, on="row_id", how="inner")
    if len(merged) == 0:
        raise RunnerError("no overlapping row_ids between the two files")
    pred = PredictionSet(
        p_pos=merged["p_pos"].to_numpy(dtype=np.float64),
        y=merged["label"].to_numpy(dtype=np.int64),
    )
    report = full_report(pred, n_bins=args.bins)
    for k, v in vars(report).items():
        print(f"{k}: {v:.6f}")
    return 0


def cmd_export_clean(args) -> int:
    name, ds = resolve_dataset(args.dataset, args.data_dir)
    export_clean_csv(ds, args.out)
    print(f"wrote {ds.n_rows} rows x {ds.n_features} features to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vbll-calib",
        description="Bayesian last-layer calibration experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment grid")
    run.add_argument("--dataset", required=True,
                     help="built-in name(s), comma-separated, or a CSV path")
    run.add_argument("--features", default="raw",
                     help="raw | proj:K | file:PATH")
    run.add_argument("--configs", default="C1,C2,C3,C4,C5",
                     help="comma-separated preset ids (empty for none)")
    run.add_argument("--baseline", default="map",
                     help="map | probs:PATH | none")
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--out", default="out")
    run.add_argument("--ece-weighting", choices=("mass", "binmean"),
                     default="mass")
    run.add_argument("--bins", type=int, default=40)
    run.add_argument("--data-dir", default="data")
    run.set_defaults(func=cmd_run)

    met = sub.add_parser("metrics", help="score a prediction file")
    met.add_argument("--probs", required=True, help="CSV row_id,p_pos")
    met.add_argument("--labels", required=True, help="CSV row_id,label")
    met.add_argument("--bins", type=int, default=40)
    met.set_defaults(func=cmd_metrics)

    exp = sub.add_parser("export-clean", help="re-emit a cleaned dataset CSV")
    exp.add_argument("--dataset", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--data-dir", default="data")
    exp.set_defaults(func=cmd_export_clean)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DataError, RunnerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
