"""Variational Bayesian last-layer classification with calibration metrics."""

from .data import (
    SCHEMAS,
    DatasetSchema,
    Scaler,
    SplitIndices,
    TabularDataset,
    apply_scaler,
    binarize_heart_label,
    export_clean_csv,
    fit_scaler,
    load_clean_csv,
    load_dataset,
    stratified_split,
)
from .features import (
    EmbeddingSet,
    load_embeddings,
    random_projection,
    raw_features,
    save_embeddings,
)
from .head import (
    CONFIG_PRESETS,
    TrainConfig,
    VBLLParams,
    WeightSample,
    elbo_loss,
    forward_logits,
    init_params,
    kl_to_standard_normal,
    load_model,
    loss_gradients,
    map_predictive,
    predictive_probs,
    sample_weights,
    save_model,
)
from .metrics import (
    MetricsReport,
    PredictionSet,
    ReliabilityBins,
    auc_roc,
    brier,
    classification_report,
    ece,
    full_report,
    nll,
    reliability_bins,
)
from .optim import AdamState, AnnealSchedule, TrainHistory, adam_step, anneal_beta, train
from .runner import (
    ExperimentManifest,
    ResultsTable,
    build_embeddings,
    run_baseline,
    run_config,
    run_grid,
)

__version__ = "0.1.0"
