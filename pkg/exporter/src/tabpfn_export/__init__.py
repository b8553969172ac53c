from .backends import (
    BackendResult,
    ModelUnavailableError,
    StubEncoderBackend,
    TabPFNBackend,
    make_backend,
    mean_pool,
)
from .datasets import SCHEMAS, DatasetError, load_clean, stratified_split
from .export import ExportManifest, export_baseline_probs, export_embeddings

__version__ = "0.1.0"
