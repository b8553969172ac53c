"""Loading, cleaning, splitting and standardizing the tabular medical datasets."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


class DataError(ValueError):
    """Raised when a dataset file or its contents violate the schema."""


@dataclass(frozen=True)
class DatasetSchema:
    name: str
    feature_columns: tuple[str, ...]
    label_column: str
    label_rule: dict[str, int]
    missing_marker: str = "?"

    def __post_init__(self):
        if not self.feature_columns:
            raise DataError("schema needs at least one feature column")
        if len(set(self.feature_columns)) != len(self.feature_columns):
            raise DataError("feature columns must be unique")


@dataclass(frozen=True)
class TabularDataset:
    X: np.ndarray  # [N, D] float64
    y: np.ndarray  # [N] int, values in {0, 1}
    row_ids: np.ndarray  # [N] source row indices
    schema: DatasetSchema

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    seed: int
    train_fraction: float = 0.7


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray


def binarize_heart_label(raw: int) -> int:
    """Cleveland convention: 0 = no disease, 1..4 = disease present."""
    raw = int(raw)
    if not 0 <= raw <= 4:
        raise DataError(f"heart disease label out of range 0..4: {raw}")
    return 0 if raw == 0 else 1


_WDBC_FEATURES = tuple(f"f{i}" for i in range(30))
_PIMA_FEATURES = (
    "Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
    "Insulin", "BMI", "DiabetesPedigreeFunction", "Age",
)
_HEART_FEATURES = (
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
    "thalach", "exang", "oldpeak", "slope", "ca", "thal",
)

SCHEMAS: dict[str, DatasetSchema] = {
    # positive class: malignant
    "breast_cancer": DatasetSchema(
        name="breast_cancer",
        feature_columns=_WDBC_FEATURES,
        label_column="diagnosis",
        label_rule={"M": 1, "B": 0},
    ),
    # positive class: diabetic
    "pima": DatasetSchema(
        name="pima",
        feature_columns=_PIMA_FEATURES,
        label_column="Outcome",
        label_rule={"0": 0, "1": 1},
    ),
    # positive class: disease present (raw labels 0..4 binarized)
    "heart_cleveland": DatasetSchema(
        name="heart_cleveland",
        feature_columns=_HEART_FEATURES,
        label_column="num",
        label_rule={"0": 0, "1": 1, "2": 1, "3": 1, "4": 1},
    ),
}


def load_dataset(path, schema: DatasetSchema) -> TabularDataset:
    """Read a headered CSV, drop rows with missing features, map labels to {0, 1}.

    Row ids refer to positions in the source file (0-based, after the header).
    """
    try:
        df = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except FileNotFoundError:
        raise DataError(f"dataset file not found: {path}")
    needed = set(schema.feature_columns) | {schema.label_column}
    missing_cols = needed - set(df.columns)
    if missing_cols:
        raise DataError(
            f"{schema.name}: header missing columns {sorted(missing_cols)}"
        )

    feats = df[list(schema.feature_columns)]
    keep = ~(feats.isna() | (feats == schema.missing_marker)).any(axis=1)
    n_dropped = int((~keep).sum())
    df = df[keep]

    raw_labels = df[schema.label_column].astype(str).str.strip()
    unknown = sorted(set(raw_labels) - set(schema.label_rule))
    if unknown:
        raise DataError(f"{schema.name}: unknown raw labels {unknown}")
    y = raw_labels.map(schema.label_rule).to_numpy(dtype=np.int64)

    try:
        X = df[list(schema.feature_columns)].to_numpy(dtype=np.float64)
    except ValueError as exc:
        raise DataError(f"{schema.name}: non-numeric feature value: {exc}")
    row_ids = df.index.to_numpy(dtype=np.int64)

    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DataError(f"{schema.name}: only one class present after cleaning")
    logger.info(
        "%s: loaded %d rows (%d dropped), %d positive / %d negative",
        schema.name, len(y), n_dropped, n_pos, n_neg,
    )
    return TabularDataset(X=X, y=y, row_ids=row_ids, schema=schema)


def stratified_split(
    ds: TabularDataset, train_fraction: float = 0.7, seed: int = 42
) -> SplitIndices:
    """Deterministic stratified split; |train| = round(train_fraction * N).

    Per-class training counts come from largest-remainder apportionment so the
    class balance of the training set stays within one sample of the full set.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = ds.n_rows
    n_train = round(train_fraction * n)
    classes = np.unique(ds.y)
    for c in classes:
        if (ds.y == c).sum() < 2:
            raise DataError(f"class {c} has fewer than 2 members")

    ideal = {c: train_fraction * (ds.y == c).sum() for c in classes}
    counts = {c: int(np.floor(ideal[c])) for c in classes}
    leftover = n_train - sum(counts.values())
    by_remainder = sorted(classes, key=lambda c: (-(ideal[c] - counts[c]), c))
    for c in by_remainder[:leftover]:
        counts[c] += 1

    rng = np.random.default_rng(seed)
    train_parts, val_parts = [], []
    for c in classes:
        idx = np.where(ds.y == c)[0]
        rng.shuffle(idx)
        train_parts.append(idx[: counts[c]])
        val_parts.append(idx[counts[c]:])
    train = np.sort(np.concatenate(train_parts))
    val = np.sort(np.concatenate(val_parts))
    return SplitIndices(train=train, val=val, seed=seed, train_fraction=train_fraction)


def fit_scaler(ds: TabularDataset, idx: np.ndarray) -> Scaler:
    """Z-score parameters from the given (training) rows only.

    Population (1/N) standard deviation; zero-variance columns fall back to
    std = 1 so scaling never divides by zero.
    """
    idx = np.asarray(idx)
    if idx.size == 0:
        raise DataError("cannot fit scaler on an empty index list")
    rows = ds.X[idx]
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)  # population denominator
    std = np.where(std > 0, std, 1.0)
    return Scaler(mean=mean, std=std)


def apply_scaler(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != scaler.mean.shape[0]:
        raise DataError(
            f"scaler expects {scaler.mean.shape[0]} columns, got {X.shape[1]}"
        )
    return (X - scaler.mean) / scaler.std


def export_clean_csv(ds: TabularDataset, path) -> None:
    """Re-emit a cleaned dataset as CSV: row_id,label,f0..f{D-1}."""
    cols = {"row_id": ds.row_ids, "label": ds.y}
    for j in range(ds.n_features):
        cols[f"f{j}"] = ds.X[:, j]
    pd.DataFrame(cols).to_csv(path, index=False)


def load_clean_csv(path, name: str = "clean") -> TabularDataset:
    """Load a dataset previously written by export_clean_csv."""
    df = pd.read_csv(path)
    expected = {"row_id", "label"}
    if not expected <= set(df.columns):
        raise DataError(f"clean CSV must have columns row_id,label,f0..: {path}")
    feat_cols = [c for c in df.columns if c.startswith("f")]
    feat_cols.sort(key=lambda c: int(c[1:]))
    schema = DatasetSchema(
        name=name,
        feature_columns=tuple(feat_cols),
        label_column="label",
        label_rule={"0": 0, "1": 1},
    )
    y = df["label"].to_numpy(dtype=np.int64)
    if not set(np.unique(y)) <= {0, 1}:
        raise DataError("clean CSV labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise DataError("clean CSV has a single class")
    return TabularDataset(
        X=df[feat_cols].to_numpy(dtype=np.float64),
        y=y,
        row_ids=df["row_id"].to_numpy(dtype=np.int64),
        schema=schema,
    )
