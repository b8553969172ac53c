"""Binary classification and calibration metrics plus reliability-diagram bins."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LOG_EPS = 1e-12


@dataclass(frozen=True)
class PredictionSet:
    p_pos: np.ndarray  # [N] predicted probability of the positive class
    y: np.ndarray  # [N] labels in {0, 1}

    def __post_init__(self):
        p = np.asarray(self.p_pos, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if p.shape != y.shape or p.ndim != 1:
            raise ValueError("p_pos and y must be 1-D and aligned")
        if not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite")
        if p.min() < 0 or p.max() > 1:
            raise ValueError("probabilities must lie in [0, 1]")
        if not set(np.unique(y)) <= {0, 1}:
            raise ValueError("labels must be 0/1")
        object.__setattr__(self, "p_pos", p)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc_roc: float
    nll: float
    brier: float
    ece: float
    ece_bin_mean: float


@dataclass(frozen=True)
class ReliabilityBins:
    n_bins: int
    lower: np.ndarray  # [n_bins] bin lower edges
    upper: np.ndarray  # [n_bins] bin upper edges
    count: np.ndarray  # [n_bins] samples per bin
    confidence: np.ndarray  # [n_bins] mean p_pos per bin (nan when empty)
    accuracy: np.ndarray  # [n_bins] positive-label frequency per bin (nan when empty)

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("bin_lo,bin_hi,count,conf,acc\n")
            for i in range(self.n_bins):
                conf = "" if self.count[i] == 0 else f"{self.confidence[i]:.6f}"
                acc = "" if self.count[i] == 0 else f"{self.accuracy[i]:.6f}"
                f.write(
                    f"{self.lower[i]:.6f},{self.upper[i]:.6f},"
                    f"{self.count[i]},{conf},{acc}\n"
                )


def classification_report(
    pred: PredictionSet, threshold: float = 0.5
) -> tuple[float, float, float, float]:
    """(accuracy, precision, recall, f1) at the given threshold.

    Positive class is 1; zero-denominator precision/recall/f1 are defined as 0.
    """
    yhat = (pred.p_pos >= threshold).astype(np.int64)
    y = pred.y
    tp = int(np.sum((yhat == 1) & (y == 1)))
    fp = int(np.sum((yhat == 1) & (y == 0)))
    fn = int(np.sum((yhat == 0) & (y == 1)))
    acc = float(np.mean(yhat == y))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return acc, precision, recall, f1


def auc_roc(pred: PredictionSet) -> float:
    """Mann-Whitney AUC with average ranks for tied scores."""
    y = pred.y
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC requires both classes present")
    ranks = _average_ranks(pred.p_pos)
    r_pos = ranks[y == 1].sum()
    return float((r_pos - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # 1-based average rank
        i = j + 1
    return ranks


def nll(pred: PredictionSet) -> float:
    """Mean negative log-likelihood with probabilities clamped away from 0/1."""
    p = np.clip(pred.p_pos, LOG_EPS, 1.0 - LOG_EPS)
    y = pred.y
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def brier(pred: PredictionSet) -> float:
    """Binary Brier score: mean (p_pos - y)^2."""
    return float(np.mean((pred.p_pos - pred.y) ** 2))


def _bin_index(p: np.ndarray, n_bins: int) -> np.ndarray:
    # equal-width bins over [0, 1], last bin right-inclusive
    return np.minimum((p * n_bins).astype(np.int64), n_bins - 1)


def ece(
    pred: PredictionSet, n_bins: int = 40, weighting: str = "mass_weighted"
) -> float:
    """Expected calibration error over equal-width confidence bins.

    mass_weighted: sum over bins of (count/N) * |acc - conf|.
    bin_mean: plain mean of |acc - conf| over non-empty bins.
    """
    if n_bins < 1:
        raise ValueError("need at least one bin")
    if weighting not in ("mass_weighted", "bin_mean"):
        raise ValueError(f"unknown ECE weighting: {weighting}")
    bins = reliability_bins(pred, n_bins)
    nonempty = bins.count > 0
    gap = np.abs(bins.accuracy[nonempty] - bins.confidence[nonempty])
    if weighting == "mass_weighted":
        return float(np.sum(bins.count[nonempty] / pred.n * gap))
    return float(np.mean(gap))


def reliability_bins(pred: PredictionSet, n_bins: int = 40) -> ReliabilityBins:
    """Per-bin counts, mean confidence, and empirical accuracy."""
    if n_bins < 1:
        raise ValueError("need at least one bin")
    idx = _bin_index(pred.p_pos, n_bins)
    count = np.bincount(idx, minlength=n_bins)
    conf_sum = np.bincount(idx, weights=pred.p_pos, minlength=n_bins)
    acc_sum = np.bincount(idx, weights=pred.y.astype(np.float64), minlength=n_bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        conf = np.where(count > 0, conf_sum / count, np.nan)
        acc = np.where(count > 0, acc_sum / count, np.nan)
    edges = np.linspace(0.0, 1.0, n_bins + 1)
    return ReliabilityBins(
        n_bins=n_bins,
        lower=edges[:-1],
        upper=edges[1:],
        count=count,
        confidence=conf,
        accuracy=acc,
    )


def full_report(
    pred: PredictionSet,
    n_bins: int = 40,
    threshold: float = 0.5,
) -> MetricsReport:
    """All seven metrics (plus the alternative ECE weighting) in one pass."""
    acc, precision, recall, f1 = classification_report(pred, threshold)
    return MetricsReport(
        accuracy=acc,
        precision=precision,
        recall=recall,
        f1=f1,
        auc_roc=auc_roc(pred),
        nll=nll(pred),
        brier=brier(pred),
        ece=ece(pred, n_bins, "mass_weighted"),
        ece_bin_mean=ece(pred, n_bins, "bin_mean"),
    )
