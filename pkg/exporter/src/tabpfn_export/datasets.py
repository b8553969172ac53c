"""Dataset cleaning and splitting, duplicated from the core engine's contract
so the exporter has no code-level dependency on it. The split must reproduce
the core's 70/30 stratified split for the same seed; both sides implement the
same largest-remainder apportionment over a seeded per-class shuffle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class Schema:
    name: str
    feature_columns: tuple[str, ...]
    label_column: str
    label_rule: dict[str, int]
    missing_marker: str = "?"


SCHEMAS: dict[str, Schema] = {
    "breast_cancer": Schema(
        name="breast_cancer",
        feature_columns=tuple(f"f{i}" for i in range(30)),
        label_column="diagnosis",
        label_rule={"M": 1, "B": 0},
    ),
    "pima": Schema(
        name="pima",
        feature_columns=(
            "Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
            "Insulin", "BMI", "DiabetesPedigreeFunction", "Age",
        ),
        label_column="Outcome",
        label_rule={"0": 0, "1": 1},
    ),
    "heart_cleveland": Schema(
        name="heart_cleveland",
        feature_columns=(
            "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
            "thalach", "exang", "oldpeak", "slope", "ca", "thal",
        ),
        label_column="num",
        label_rule={"0": 0, "1": 1, "2": 1, "3": 1, "4": 1},
    ),
}


def load_clean(path, schema: Schema):
    """Returns (X, y, row_ids) with missing-marker rows dropped."""
    df = pd.read_csv(path, dtype=str, skipinitialspace=True)
    needed = set(schema.feature_columns) | {schema.label_column}
    if not needed <= set(df.columns):
        raise DatasetError(f"{schema.name}: header mismatch at {path}")
    feats = df[list(schema.feature_columns)]
    keep = ~(feats.isna() | (feats == schema.missing_marker)).any(axis=1)
    df = df[keep]
    raw = df[schema.label_column].astype(str).str.strip()
    unknown = set(raw) - set(schema.label_rule)
    if unknown:
        raise DatasetError(f"{schema.name}: unknown labels {sorted(unknown)}")
    y = raw.map(schema.label_rule).to_numpy(dtype=np.int64)
    X = df[list(schema.feature_columns)].to_numpy(dtype=np.float64)
    row_ids = df.index.to_numpy(dtype=np.int64)
    if len(set(y)) < 2:
        raise DatasetError(f"{schema.name}: single class after cleaning")
    return X, y, row_ids


def stratified_split(y: np.ndarray, train_fraction: float, seed: int):
    """Same algorithm as the core engine; returns (train_idx, val_idx)."""
    n = len(y)
    n_train = round(train_fraction * n)
    classes = np.unique(y)
    ideal = {c: train_fraction * (y == c).sum() for c in classes}
    counts = {c: int(np.floor(ideal[c])) for c in classes}
    leftover = n_train - sum(counts.values())
    by_remainder = sorted(classes, key=lambda c: (-(ideal[c] - counts[c]), c))
    for c in by_remainder[:leftover]:
        counts[c] += 1
    rng = np.random.default_rng(seed)
    train_parts, val_parts = [], []
    for c in classes:
        idx = np.where(y == c)[0]
        rng.shuffle(idx)
        train_parts.append(idx[: counts[c]])
        val_parts.append(idx[counts[c]:])
    return (
        np.sort(np.concatenate(train_parts)),
        np.sort(np.concatenate(val_parts)),
    )
