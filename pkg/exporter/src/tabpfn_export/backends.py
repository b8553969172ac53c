"""Model backends: the real pretrained tabular transformer (when installed)
and a small deterministic stand-in encoder used for tests and dry runs.

Both expose run(X_train, y_train, X_query) -> BackendResult where
`activations` is the final encoder layer's output captured by a forward hook,
with the query-row axis still present, and `probs` are positive-class
probabilities for the query rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ModelUnavailableError(RuntimeError):
    """The pretrained model (or torch) is not installed."""


@dataclass
class BackendResult:
    activations: np.ndarray  # row axis plus at least one pooled axis + hidden
    probs: np.ndarray  # [n_query] positive-class probability


def mean_pool(activations: np.ndarray, n_rows: int, row_axis: int | None = None):
    """Average every axis except the query-row axis and the hidden axis.

    The hidden axis is the last one. If row_axis is not given, it is the
    first axis whose length equals n_rows.
    """
    act = np.asarray(activations, dtype=np.float64)
    if act.ndim < 2:
        raise ValueError("activations need at least a row and a hidden axis")
    if row_axis is None:
        candidates = [ax for ax in range(act.ndim - 1) if act.shape[ax] == n_rows]
        if not candidates:
            raise ValueError(
                f"no activation axis matches the {n_rows} query rows: {act.shape}"
            )
        row_axis = candidates[0]
    act = np.moveaxis(act, row_axis, 0)
    while act.ndim > 2:
        act = act.mean(axis=1)
    if act.shape[0] != n_rows:
        raise ValueError(f"pooled output is {act.shape}, expected [{n_rows}, H]")
    return act


class TabPFNBackend:
    """Runs the real pretrained classifier with a forward hook on its final
    transformer encoder layer."""

    def __init__(self, device: str = "cpu"):
        try:
            import torch  # noqa: F401
            from tabpfn import TabPFNClassifier
        except ImportError as exc:
            raise ModelUnavailableError(
                f"pretrained model backend unavailable: {exc}"
            )
        self._classifier_cls = TabPFNClassifier
        self.device = device

    def _final_encoder_layer(self, module):
        import torch.nn as nn

        last = None
        for name, sub in module.named_modules():
            cls = type(sub).__name__
            if "EncoderLayer" in cls or isinstance(sub, nn.TransformerEncoderLayer):
                last = sub
        if last is None:
            raise ModelUnavailableError("no encoder layer found to hook")
        return last

    def run(self, X_train, y_train, X_query) -> BackendResult:
        clf = self._classifier_cls(device=self.device)
        clf.fit(X_train, y_train)

        captured = []

        def hook(_module, _inputs, output):
            import torch

            out = output[0] if isinstance(output, tuple) else output
            if isinstance(out, torch.Tensor):
                captured.append(out.detach().cpu().numpy())

        model = getattr(clf, "model_", None) or getattr(clf, "model", None)
        if model is None:
            raise ModelUnavailableError("classifier exposes no fitted model")
        handle = self._final_encoder_layer(model).register_forward_hook(hook)
        try:
            probs = clf.predict_proba(X_query)
        finally:
            handle.remove()
        if not captured:
            raise ModelUnavailableError("forward hook captured no activations")
        return BackendResult(activations=captured[-1], probs=probs[:, 1])


class StubEncoderBackend:
    """Deterministic small transformer encoder; mirrors the real backend's
    capture path (forward hook on the final encoder layer) without pretrained
    weights. Probabilities come from a logistic head on the pooled features.
    """

    def __init__(self, hidden_dim: int = 16, seed: int = 0):
        try:
            import torch
            import torch.nn as nn
        except ImportError as exc:  # pragma: no cover
            raise ModelUnavailableError(f"torch unavailable: {exc}")
        self.hidden_dim = hidden_dim
        self.seed = seed
        self._torch = torch
        self._nn = nn

    def _build(self, n_features):
        torch, nn = self._torch, self._nn
        torch.manual_seed(self.seed)
        proj = nn.Linear(1, self.hidden_dim)
        layer = nn.TransformerEncoderLayer(
            d_model=self.hidden_dim, nhead=2, dim_feedforward=32,
            batch_first=True,
        )
        encoder = nn.TransformerEncoder(layer, num_layers=2)
        return proj, encoder

    def run(self, X_train, y_train, X_query) -> BackendResult:
        torch = self._torch
        X_query = np.asarray(X_query, dtype=np.float64)
        n, d = X_query.shape
        mean = X_train.mean(axis=0)
        std = X_train.std(axis=0)
        std[std == 0] = 1.0
        Z = (X_query - mean) / std

        proj, encoder = self._build(d)
        captured = []

        def hook(_module, _inputs, output):
            captured.append(output.detach().cpu().numpy())

        # each feature becomes one sequence position
        final_layer = encoder.layers[-1]
        handle = final_layer.register_forward_hook(hook)
        try:
            with torch.no_grad():
                x = torch.tensor(Z, dtype=torch.float32).unsqueeze(-1)  # [n, d, 1]
                encoder(proj(x))
        finally:
            handle.remove()
        activations = captured[-1]  # [n, d, hidden]

        # simple logistic head on the class-mean direction of the train data
        Zt = (np.asarray(X_train) - mean) / std
        direction = Zt[y_train == 1].mean(axis=0) - Zt[y_train == 0].mean(axis=0)
        logits = Z @ direction
        probs = 1.0 / (1.0 + np.exp(-logits))
        return BackendResult(activations=activations, probs=probs)


def make_backend(name: str, **kwargs):
    if name == "tabpfn":
        return TabPFNBackend(**kwargs)
    if name == "stub":
        return StubEncoderBackend(**kwargs)
    raise ValueError(f"unknown backend: {name}")
