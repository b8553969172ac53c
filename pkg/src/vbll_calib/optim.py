"""Adam optimizer, KL annealing schedules, and the full-batch training loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .head import (
    TrainConfig,
    VBLLParams,
    _loss_and_grads,
    _draw_eps,
    init_params,
)

PARAM_FIELDS = ("W_mu", "W_logvar", "b_mu", "b_logvar")


class TrainingError(RuntimeError):
    """Raised when a run must abort (e.g. non-finite gradients)."""


@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lr: float = 1e-3

    @classmethod
    def for_params(cls, p: VBLLParams, lr: float = 1e-3) -> "AdamState":
        return cls(
            m={k: np.zeros_like(getattr(p, k)) for k in PARAM_FIELDS},
            v={k: np.zeros_like(getattr(p, k)) for k in PARAM_FIELDS},
            lr=lr,
        )


@dataclass(frozen=True)
class AnnealSchedule:
    mode: str  # linear | cosine
    total_epochs: int = 50


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    ce: list[float] = field(default_factory=list)
    kl: list[float] = field(default_factory=list)
    beta: list[float] = field(default_factory=list)

    def record(self, loss: float, ce: float, kl: float, beta: float) -> None:
        self.loss.append(loss)
        self.ce.append(ce)
        self.kl.append(kl)
        self.beta.append(beta)

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("epoch,loss,ce,kl,beta\n")
            for t, row in enumerate(zip(self.loss, self.ce, self.kl, self.beta)):
                f.write(f"{t}," + ",".join(f"{x:.6f}" for x in row) + "\n")


def anneal_beta(s: AnnealSchedule, t: int) -> float:
    """KL weight at epoch t: ramps 0 -> 1 over total_epochs.

    linear: t/T; cosine: (1 - cos(pi * t / T)) / 2.
    """
    T = s.total_epochs
    if not 0 <= t <= T:
        raise ValueError(f"epoch {t} outside [0, {T}]")
    frac = t / T
    if s.mode == "linear":
        return frac
    if s.mode == "cosine":
        return 0.5 * (1.0 - math.cos(math.pi * frac))
    raise ValueError(f"unknown annealing mode: {s.mode}")


def adam_step(state: AdamState, params: VBLLParams, grads: VBLLParams) -> None:
    """One bias-corrected Adam update, in place."""
    state.t += 1
    t = state.t
    for k in PARAM_FIELDS:
        g = getattr(grads, k)
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in {k} at step {t}")
        state.m[k] = state.beta1 * state.m[k] + (1 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1 - state.beta2) * g**2
        m_hat = state.m[k] / (1 - state.beta1**t)
        v_hat = state.v[k] / (1 - state.beta2**t)
        getattr(params, k)[...] -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def train(
    config: TrainConfig, E_train: np.ndarray, y_train: np.ndarray
) -> tuple[VBLLParams, TrainHistory]:
    """Full-batch training: one Adam step per epoch, beta re-evaluated per
    epoch from the annealing schedule, log-variances clamped after each step.
    """
    E_train = np.asarray(E_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    if E_train.shape[0] != y_train.shape[0]:
        raise ValueError("embeddings and labels are misaligned")

    n_train, H = E_train.shape
    params = init_params(
        H, 2, config.init_logvar, config.weight_mu_coef, config.seed
    )
    state = AdamState.for_params(params, lr=config.lr)
    schedule = AnnealSchedule(mode=config.kl_mode, total_epochs=config.epochs)
    rng = None if config.deterministic else np.random.default_rng(config.seed)
    history = TrainHistory()

    for epoch in range(config.epochs):
        beta = 0.0 if config.deterministic else anneal_beta(schedule, epoch)
        eps_draws = _draw_eps(params, config.train_samples, rng)
        loss, ce, kl, grads = _loss_and_grads(
            params, E_train, y_train, beta, eps_draws, n_train
        )
        adam_step(state, params, grads)
        params.clamp_logvars()
        history.record(loss, ce, kl, beta)

    return params, history
