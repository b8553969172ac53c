"""Frozen feature sources for the Bayesian head, plus the embedding file format."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .data import Scaler, TabularDataset, apply_scaler

MAGIC = b"VBLE"
VERSION = 1


class EmbeddingError(ValueError):
    """Raised on malformed embedding files or inputs."""


@dataclass(frozen=True)
class EmbeddingSet:
    E: np.ndarray  # [N, H] float
    row_ids: np.ndarray  # [N]
    labels: np.ndarray | None  # [N] in {0, 1}, or None
    source: str  # raw | random_projection | external

    def __post_init__(self):
        if not np.all(np.isfinite(self.E)):
            raise EmbeddingError("embedding values must be finite")

    @property
    def n_rows(self) -> int:
        return self.E.shape[0]

    @property
    def dim(self) -> int:
        return self.E.shape[1]


def raw_features(ds: TabularDataset, scaler: Scaler) -> EmbeddingSet:
    """Standardized raw features as the embedding (H = D)."""
    return EmbeddingSet(
        E=apply_scaler(scaler, ds.X),
        row_ids=ds.row_ids.copy(),
        labels=ds.y.copy(),
        source="raw",
    )


def random_projection(
    ds: TabularDataset, scaler: Scaler, target_dim: int, seed: int
) -> EmbeddingSet:
    """Seeded Gaussian random projection of the standardized features.

    Projection entries are N(0, 1)/sqrt(D) so row norms are roughly preserved.
    """
    if target_dim < 1:
        raise EmbeddingError(f"target_dim must be >= 1, got {target_dim}")
    Z = apply_scaler(scaler, ds.X)
    d = Z.shape[1]
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((d, target_dim)) / np.sqrt(d)
    return EmbeddingSet(
        E=Z @ P,
        row_ids=ds.row_ids.copy(),
        labels=ds.y.copy(),
        source="random_projection",
    )


def save_embeddings(es: EmbeddingSet, path, trailer: str = "") -> None:
    """Write the binary embedding format.

    Layout: magic "VBLE", u32 version, u32 n_rows, u32 dim, u8 has_labels,
    then f32 little-endian values row-major, then labels as bytes if present.
    An optional UTF-8 text trailer may follow the payload; loaders ignore it.
    """
    has_labels = es.labels is not None
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IIIB", VERSION, es.n_rows, es.dim, int(has_labels)))
        f.write(np.ascontiguousarray(es.E, dtype="<f4").tobytes())
        if has_labels:
            f.write(np.asarray(es.labels, dtype=np.uint8).tobytes())
        if trailer:
            f.write(trailer.encode("utf-8"))


def load_embeddings(path) -> EmbeddingSet:
    """Load either the binary "VBLE" format or the CSV fallback."""
    with open(path, "rb") as f:
        head = f.read(4)
        if head != MAGIC:
            if _looks_like_csv(path):
                return _load_embeddings_csv(path)
            raise EmbeddingError(f"bad magic in embedding file: {head!r}")
        fixed = f.read(13)
        if len(fixed) < 13:
            raise EmbeddingError("truncated embedding header")
        version, n_rows, dim, has_labels = struct.unpack("<IIIB", fixed)
        if version != VERSION:
            raise EmbeddingError(f"unsupported embedding file version {version}")
        if n_rows == 0 or dim == 0:
            raise EmbeddingError("embedding file declares an empty set")
        payload = f.read(4 * n_rows * dim)
        if len(payload) < 4 * n_rows * dim:
            raise EmbeddingError("truncated embedding payload")
        E = np.frombuffer(payload, dtype="<f4").reshape(n_rows, dim).astype(np.float64)
        labels = None
        if has_labels:
            lab = f.read(n_rows)
            if len(lab) < n_rows:
                raise EmbeddingError("truncated label block")
            labels = np.frombuffer(lab, dtype=np.uint8).astype(np.int64)
    if not np.all(np.isfinite(E)):
        raise EmbeddingError("embedding file contains non-finite values")
    return EmbeddingSet(
        E=E, row_ids=np.arange(n_rows), labels=labels, source="external"
    )


def _looks_like_csv(path) -> bool:
    with open(path, "rb") as f:
        first = f.readline()
    return first.startswith(b"row_id,")


def _load_embeddings_csv(path) -> EmbeddingSet:
    """CSV fallback: header row_id,label,e0..e{H-1} (label column optional)."""
    df = pd.read_csv(path)
    if "row_id" not in df.columns:
        raise EmbeddingError("embedding CSV must have a row_id column")
    emb_cols = [c for c in df.columns if c.startswith("e")]
    emb_cols.sort(key=lambda c: int(c[1:]))
    if not emb_cols or len(df) == 0:
        raise EmbeddingError("embedding CSV declares an empty set")
    E = df[emb_cols].to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(E)):
        raise EmbeddingError("embedding CSV contains non-finite values")
    labels = None
    if "label" in df.columns:
        labels = df["label"].to_numpy(dtype=np.int64)
    return EmbeddingSet(
        E=E,
        row_ids=df["row_id"].to_numpy(dtype=np.int64),
        labels=labels,
        source="external",
    )
