"""Experiment grid driver: baseline vs. the Bayesian configs on each dataset,
with results tables, reliability CSVs, and SVG reliability diagrams.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from .data import SplitIndices, TabularDataset, fit_scaler, stratified_split
from .features import EmbeddingSet, load_embeddings, random_projection, raw_features
from .head import CONFIG_PRESETS, TrainConfig, map_predictive, predictive_probs
from .metrics import (
    MetricsReport,
    PredictionSet,
    ReliabilityBins,
    full_report,
    reliability_bins,
)
from .optim import train

RESULT_COLUMNS = ("config", "acc", "f1", "auc", "nll", "brier", "ece")
EXTENDED_COLUMNS = RESULT_COLUMNS + ("ece_bin_mean", "precision", "recall")

# Published baseline rows (external pretrained-model probabilities), printed
# for comparison in report footers; never asserted.
REFERENCE_BASELINES = {
    "breast_cancer": {"acc": 0.982, "f1": 0.986, "auc": 0.997,
                      "nll": 0.054, "brier": 0.015, "ece": 0.189},
    "pima": {"acc": 0.753, "f1": 0.632, "auc": 0.808,
             "nll": 0.516, "brier": 0.171, "ece": 0.072},
    "heart_cleveland": {"acc": 0.846, "f1": 0.863, "auc": 0.909,
                        "nll": 0.390, "brier": 0.114, "ece": 0.220},
}


class RunnerError(RuntimeError):
    """Raised on invalid manifests or missing run inputs."""


@dataclass(frozen=True)
class ExperimentManifest:
    datasets: tuple[tuple[str, TabularDataset], ...]  # (display name, data)
    feature_source: str = "raw"  # raw | proj:<K> | file:<PATH>
    config_ids: tuple[str, ...] = ("C1", "C2", "C3", "C4", "C5")
    baseline: str = "map"  # map | probs:<PATH>
    seed: int = 42
    output_dir: str = "out"
    n_bins: int = 40
    ece_weighting: str = "mass_weighted"

    def __post_init__(self):
        if not self.config_ids and not self.baseline:
            raise RunnerError("manifest requests neither configs nor a baseline")


@dataclass
class ResultsTable:
    dataset: str
    rows: list[tuple[str, MetricsReport]] = field(default_factory=list)
    ece_weighting: str = "mass_weighted"

    def _selected_ece(self, r: MetricsReport) -> float:
        return r.ece if self.ece_weighting == "mass_weighted" else r.ece_bin_mean

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write(",".join(EXTENDED_COLUMNS) + "\n")
            for name, r in self.rows:
                vals = (
                    r.accuracy, r.f1, r.auc_roc, r.nll, r.brier,
                    self._selected_ece(r), r.ece_bin_mean, r.precision, r.recall,
                )
                f.write(name + "," + ",".join(f"{v:.6f}" for v in vals) + "\n")

    def format_table(self) -> str:
        """Human-readable table, 3 decimals, plus the reference footer."""
        lines = [f"## {self.dataset}", "Config  Acc    F1     AUC    NLL    Brier  ECE"]
        for name, r in self.rows:
            lines.append(
                f"{name:<7} "
                + " ".join(
                    f"{v:.3f}" for v in (
                        r.accuracy, r.f1, r.auc_roc, r.nll, r.brier,
                        self._selected_ece(r),
                    )
                )
            )
        ref = REFERENCE_BASELINES.get(self.dataset)
        if ref:
            lines.append(
                "reference baseline (external pretrained model): "
                + " ".join(f"{k}={v:.3f}" for k, v in ref.items())
            )
        return "\n".join(lines)


def build_embeddings(
    ds: TabularDataset, split: SplitIndices, feature_source: str
) -> EmbeddingSet:
    """Resolve a feature-source spec against a dataset and its split."""
    scaler = fit_scaler(ds, split.train)
    if feature_source == "raw":
        return raw_features(ds, scaler)
    if feature_source.startswith("proj:"):
        k = int(feature_source.split(":", 1)[1])
        return random_projection(ds, scaler, k, seed=split.seed)
    if feature_source.startswith("file:"):
        es = load_embeddings(feature_source.split(":", 1)[1])
        if es.n_rows != ds.n_rows:
            raise RunnerError(
                f"embedding file has {es.n_rows} rows, dataset has {ds.n_rows}"
            )
        return es
    raise RunnerError(f"unknown feature source: {feature_source}")


def _evaluate(
    probs: np.ndarray, y_val: np.ndarray, n_bins: int
) -> tuple[MetricsReport, ReliabilityBins]:
    pred = PredictionSet(p_pos=probs, y=y_val)
    return full_report(pred, n_bins=n_bins), reliability_bins(pred, n_bins)


def run_config(
    ds: TabularDataset,
    embeddings: EmbeddingSet,
    split: SplitIndices,
    cfg: TrainConfig,
    n_bins: int = 40,
) -> tuple[MetricsReport, ReliabilityBins]:
    """Train one config on the train split and score it on the validation split."""
    if embeddings.n_rows != ds.n_rows:
        raise RunnerError("embeddings are not row-aligned with the dataset")
    params, _ = train(cfg, embeddings.E[split.train], ds.y[split.train])
    rng = np.random.default_rng(cfg.seed)
    probs = predictive_probs(params, embeddings.E[split.val], cfg.eval_samples, rng)
    return _evaluate(probs[:, 1], ds.y[split.val], n_bins)


def run_baseline(
    ds: TabularDataset,
    split: SplitIndices,
    embeddings: EmbeddingSet | None = None,
    probs_path: str | None = None,
    seed: int = 42,
    n_bins: int = 40,
) -> tuple[MetricsReport, ReliabilityBins]:
    """Deterministic baseline: either the built-in MAP head (softmax regression
    trained with the KL weight and sampling noise both forced to zero) or an
    external probability file covering every validation row.
    """
    if probs_path is not None:
        p_pos = load_baseline_probs(probs_path, ds.row_ids[split.val])
        return _evaluate(p_pos, ds.y[split.val], n_bins)
    if embeddings is None:
        raise RunnerError("builtin baseline needs embeddings")
    cfg = TrainConfig(deterministic=True, train_samples=1, seed=seed)
    params, _ = train(cfg, embeddings.E[split.train], ds.y[split.train])
    probs = map_predictive(params, embeddings.E[split.val])
    return _evaluate(probs[:, 1], ds.y[split.val], n_bins)


def load_baseline_probs(path, val_row_ids: np.ndarray) -> np.ndarray:
    """Read a row_id,p_pos CSV and align it with the validation rows.

    Lines starting with '#' (e.g. a seed trailer) are ignored.
    """
    df = pd.read_csv(path, comment="#")
    if not {"row_id", "p_pos"} <= set(df.columns):
        raise RunnerError("probability file must have columns row_id,p_pos")
    lookup = dict(zip(df["row_id"].astype(int), df["p_pos"].astype(float)))
    out = np.empty(len(val_row_ids))
    for i, rid in enumerate(val_row_ids):
        if int(rid) not in lookup:
            raise RunnerError(f"probability file missing validation row_id {rid}")
        out[i] = lookup[int(rid)]
    return out


def run_grid(manifest: ExperimentManifest) -> list[ResultsTable]:
    """Run baseline + configs on every dataset and write all artifacts."""
    os.makedirs(manifest.output_dir, exist_ok=True)
    tables = []
    panels = {}  # (row label, dataset name) -> ReliabilityBins
    for ds_name, ds in manifest.datasets:
        split = stratified_split(ds, 0.7, manifest.seed)
        embeddings = build_embeddings(ds, split, manifest.feature_source)
        table = ResultsTable(dataset=ds_name, ece_weighting=manifest.ece_weighting)

        if manifest.baseline:
            probs_path = (
                manifest.baseline.split(":", 1)[1]
                if manifest.baseline.startswith("probs:")
                else None
            )
            report, bins = run_baseline(
                ds, split,
                embeddings=embeddings,
                probs_path=probs_path,
                seed=manifest.seed,
                n_bins=manifest.n_bins,
            )
            table.rows.append(("Baseline", report))
            panels[("Baseline", ds_name)] = bins
            _write_config_artifacts(manifest.output_dir, ds_name, "Baseline", bins)

        for i, cfg_id in enumerate(manifest.config_ids):
            cfg = resolve_config(cfg_id).with_seed(manifest.seed ^ i)
            report, bins = run_config(ds, embeddings, split, cfg, manifest.n_bins)
            table.rows.append((cfg_id, report))
            panels[(cfg_id, ds_name)] = bins
            _write_config_artifacts(manifest.output_dir, ds_name, cfg_id, bins)

        table.to_csv(os.path.join(manifest.output_dir, f"results_{ds_name}.csv"))
        tables.append(table)

    if len(manifest.datasets) == 1:
        # canonical name expected by single-dataset callers
        single = os.path.join(manifest.output_dir, "results.csv")
        tables[0].to_csv(single)

    row_labels = (["Baseline"] if manifest.baseline else []) + list(manifest.config_ids)
    col_labels = [name for name, _ in manifest.datasets]
    grid_svg = render_grid_svg(panels, row_labels, col_labels)
    with open(os.path.join(manifest.output_dir, "reliability_grid.svg"), "w") as f:
        f.write(grid_svg)
    return tables


def resolve_config(cfg_id: str) -> TrainConfig:
    if cfg_id in CONFIG_PRESETS:
        return CONFIG_PRESETS[cfg_id]
    raise RunnerError(f"unknown config preset: {cfg_id}")


def _write_config_artifacts(out_dir, ds_name, label, bins: ReliabilityBins) -> None:
    stem = os.path.join(out_dir, f"reliability_{ds_name}_{label}")
    bins.to_csv(stem + ".csv")
    with open(stem + ".svg", "w") as f:
        f.write(render_reliability_svg(bins, title=f"{ds_name} {label}"))


# ---------------------------------------------------------------------------
# SVG emission: hand-rolled so byte output is deterministic and self-contained.

PANEL = 220
MARGIN = 35


def _panel_elements(bins: ReliabilityBins, x0: float, y0: float) -> list[str]:
    """One reliability panel: frame, identity diagonal, per-bin markers."""
    left, top = x0 + MARGIN, y0 + 15
    size = PANEL - MARGIN - 25

    def px(v):  # confidence axis
        return left + v * size

    def py(v):  # accuracy axis (SVG y grows downward)
        return top + (1.0 - v) * size

    parts = [
        f'<rect x="{left:.1f}" y="{top:.1f}" width="{size:.1f}" height="{size:.1f}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<line x1="{px(0):.1f}" y1="{py(0):.1f}" x2="{px(1):.1f}" y2="{py(1):.1f}" '
        'stroke="gray" stroke-dasharray="4,3" stroke-width="1"/>',
    ]
    for i in range(bins.n_bins):
        if bins.count[i] == 0:
            continue
        cx = px(float(bins.confidence[i]))
        cy = py(float(bins.accuracy[i]))
        parts.append(
            f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="steelblue"/>'
        )
    return parts


def render_reliability_svg(bins: ReliabilityBins, title: str = "") -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL}" height="{PANEL}">',
        f'<text x="{PANEL / 2:.1f}" y="12" font-size="11" text-anchor="middle" '
        f'font-family="sans-serif">{title}</text>',
    ]
    parts += _panel_elements(bins, 0, 0)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_reliability_svg(bins: ReliabilityBins, path, title: str = "") -> None:
    """Write a single self-contained reliability diagram; byte output is a
    pure function of the bins and title."""
    with open(path, "w") as f:
        f.write(render_reliability_svg(bins, title=title))


def render_grid_svg(
    panels: dict, row_labels: list[str], col_labels: list[str]
) -> str:
    """Fig-style grid: one panel per (config row, dataset column)."""
    width = len(col_labels) * PANEL
    height = len(row_labels) * PANEL
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
    ]
    for r, row in enumerate(row_labels):
        for c, col in enumerate(col_labels):
            x0, y0 = c * PANEL, r * PANEL
            parts.append(
                f'<text x="{x0 + PANEL / 2:.1f}" y="{y0 + 12}" font-size="11" '
                f'text-anchor="middle" font-family="sans-serif">{row} / {col}</text>'
            )
            bins = panels.get((row, col))
            if bins is not None:
                parts += _panel_elements(bins, x0, y0)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
