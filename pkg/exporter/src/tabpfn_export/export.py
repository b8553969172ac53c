"""Export pooled encoder activations and baseline probabilities in the file
formats the core engine consumes: the "VBLE" binary embedding format and the
row_id,p_pos probability CSV. Both files carry a text trailer recording the
split seed so the consumer can cross-check alignment.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

from .backends import BackendResult, mean_pool
from .datasets import SCHEMAS, DatasetError, load_clean, stratified_split

logger = logging.getLogger(__name__)

EMBEDDING_MAGIC = b"VBLE"
EMBEDDING_VERSION = 1

# The captured encoder output has one axis per query row and one or more
# context/sequence axes; we average every non-row, non-hidden axis. For the
# two-axis attention of the pretrained model this is the items-in-context
# axis; the choice is recorded in the output trailer.
POOLING_AXIS_DOC = "mean over all non-row axes except the hidden axis"


@dataclass(frozen=True)
class ExportManifest:
    dataset: str  # schema preset name
    data_path: str  # source CSV
    split_seed: int
    embeddings_out: str
    probs_out: str
    train_fraction: float = 0.7


def _trailer(manifest: ExportManifest) -> str:
    return (
        f"split_seed={manifest.split_seed}\n"
        f"dataset={manifest.dataset}\n"
        f"pooling_axis={POOLING_AXIS_DOC}\n"
    )


def _load(manifest: ExportManifest):
    schema = SCHEMAS.get(manifest.dataset)
    if schema is None:
        raise DatasetError(f"unknown dataset preset: {manifest.dataset}")
    return load_clean(manifest.data_path, schema)


def export_embeddings(manifest: ExportManifest, backend) -> np.ndarray:
    """Run inference over every cleaned row, capture the final encoder layer,
    mean-pool, and write the embedding file with labels. Returns the pooled
    [N, H] matrix."""
    X, y, row_ids = _load(manifest)
    train_idx, _ = stratified_split(y, manifest.train_fraction, manifest.split_seed)
    result: BackendResult = backend.run(X[train_idx], y[train_idx], X)
    pooled = mean_pool(result.activations, n_rows=len(y))
    if not np.all(np.isfinite(pooled)):
        raise ValueError("pooled activations contain non-finite values")
    logger.info(
        "%s: pooled %d rows to dim %d", manifest.dataset, *pooled.shape
    )
    _write_embedding_file(
        manifest.embeddings_out, pooled, y, trailer=_trailer(manifest)
    )
    return pooled


def _write_embedding_file(path, E: np.ndarray, labels: np.ndarray, trailer: str):
    n, h = E.shape
    with open(path, "wb") as f:
        f.write(EMBEDDING_MAGIC)
        f.write(struct.pack("<IIIB", EMBEDDING_VERSION, n, h, 1))
        f.write(np.ascontiguousarray(E, dtype="<f4").tobytes())
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())
        f.write(trailer.encode("utf-8"))


def export_baseline_probs(manifest: ExportManifest, backend) -> np.ndarray:
    """Positive-class probabilities for every validation row, as a
    row_id,p_pos CSV with the seed trailer in comment lines."""
    X, y, row_ids = _load(manifest)
    train_idx, val_idx = stratified_split(
        y, manifest.train_fraction, manifest.split_seed
    )
    result: BackendResult = backend.run(X[train_idx], y[train_idx], X[val_idx])
    probs = np.asarray(result.probs, dtype=np.float64)
    if probs.shape != (len(val_idx),):
        raise ValueError(
            f"backend returned {probs.shape} probabilities for "
            f"{len(val_idx)} validation rows"
        )
    if probs.min() < 0 or probs.max() > 1:
        raise ValueError("probabilities outside [0, 1]")
    with open(manifest.probs_out, "w") as f:
        f.write("row_id,p_pos\n")
        for rid, p in zip(row_ids[val_idx], probs):
            f.write(f"{rid},{p:.8f}\n")
        for line in _trailer(manifest).splitlines():
            f.write(f"# {line}\n")
    return probs
