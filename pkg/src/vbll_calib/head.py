"""Variational Bayesian linear head: diagonal Gaussian posteriors over the
last-layer weights and biases, reparameterized sampling, the annealed
cross-entropy + KL loss and its analytic gradients, and Monte-Carlo prediction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

MODEL_MAGIC = b"VBLM"
MODEL_VERSION = 1

LOGVAR_MIN = -30.0
LOGVAR_MAX = 10.0


@dataclass
class VBLLParams:
    W_mu: np.ndarray  # [C, H]
    W_logvar: np.ndarray  # [C, H]
    b_mu: np.ndarray  # [C]
    b_logvar: np.ndarray  # [C]

    @property
    def n_classes(self) -> int:
        return self.W_mu.shape[0]

    @property
    def in_dim(self) -> int:
        return self.W_mu.shape[1]

    def clamp_logvars(self) -> None:
        np.clip(self.W_logvar, LOGVAR_MIN, LOGVAR_MAX, out=self.W_logvar)
        np.clip(self.b_logvar, LOGVAR_MIN, LOGVAR_MAX, out=self.b_logvar)

    def copy(self) -> "VBLLParams":
        return VBLLParams(
            self.W_mu.copy(), self.W_logvar.copy(),
            self.b_mu.copy(), self.b_logvar.copy(),
        )


@dataclass(frozen=True)
class TrainConfig:
    init_logvar: float = -3.0
    weight_mu_coef: float = 0.001
    epochs: int = 50
    kl_mode: str = "cosine"  # cosine | linear
    lr: float = 1e-3
    seed: int = 42
    train_samples: int = 4
    eval_samples: int = 100
    # beta == 0 and eps == 0 throughout: plain softmax regression (MAP mode)
    deterministic: bool = False

    def with_seed(self, seed: int) -> "TrainConfig":
        return replace(self, seed=seed)


# Built-in experiment presets (kl_mode, init_logvar, weight_mu_coef).
CONFIG_PRESETS: dict[str, TrainConfig] = {
    "C1": TrainConfig(kl_mode="cosine", init_logvar=-5.0, weight_mu_coef=0.001),
    "C2": TrainConfig(kl_mode="cosine", init_logvar=-3.0, weight_mu_coef=0.001),
    "C3": TrainConfig(kl_mode="cosine", init_logvar=-2.0, weight_mu_coef=0.001),
    "C4": TrainConfig(kl_mode="cosine", init_logvar=-2.0, weight_mu_coef=0.01),
    "C5": TrainConfig(kl_mode="linear", init_logvar=-2.0, weight_mu_coef=0.01),
}


@dataclass(frozen=True)
class WeightSample:
    W: np.ndarray  # [C, H]
    b: np.ndarray  # [C]


def init_params(
    H: int, C: int, init_logvar: float, weight_mu_coef: float, seed: int
) -> VBLLParams:
    """Means ~ weight_mu_coef * N(0, 1); every log-variance set to init_logvar."""
    if not np.isfinite(init_logvar) or not np.isfinite(weight_mu_coef):
        raise ValueError("hyperparameters must be finite")
    if H < 1:
        raise ValueError(f"input dimension must be >= 1, got {H}")
    rng = np.random.default_rng(seed)
    return VBLLParams(
        W_mu=weight_mu_coef * rng.standard_normal((C, H)),
        W_logvar=np.full((C, H), float(init_logvar)),
        b_mu=weight_mu_coef * rng.standard_normal(C),
        b_logvar=np.full(C, float(init_logvar)),
    )


def sample_weights(p: VBLLParams, rng: np.random.Generator) -> WeightSample:
    """Reparameterized draw: w = mu + exp(logvar/2) * eps."""
    eps_W = rng.standard_normal(p.W_mu.shape)
    eps_b = rng.standard_normal(p.b_mu.shape)
    return WeightSample(
        W=p.W_mu + np.exp(0.5 * p.W_logvar) * eps_W,
        b=p.b_mu + np.exp(0.5 * p.b_logvar) * eps_b,
    )


def forward_logits(s: WeightSample, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != s.W.shape[1]:
        raise ValueError(f"expected {s.W.shape[1]} features, got {x.shape[-1]}")
    return x @ s.W.T + s.b


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def kl_to_standard_normal(p: VBLLParams) -> float:
    """KL(q || N(0, I)) summed over every weight and bias coordinate."""
    total = 0.0
    for mu, lv in ((p.W_mu, p.W_logvar), (p.b_mu, p.b_logvar)):
        total += 0.5 * np.sum(mu**2 + np.exp(lv) - lv - 1.0)
    return float(total)


def _draw_eps(p: VBLLParams, n_samples: int, rng: np.random.Generator | None):
    """Noise draws for n_samples reparameterized weight samples.

    rng=None forces eps = 0 (deterministic/MAP mode).
    """
    if rng is None:
        zW = np.zeros(p.W_mu.shape)
        zb = np.zeros(p.b_mu.shape)
        return [(zW, zb)] * n_samples
    return [
        (rng.standard_normal(p.W_mu.shape), rng.standard_normal(p.b_mu.shape))
        for _ in range(n_samples)
    ]


def _loss_and_grads(
    p: VBLLParams,
    E: np.ndarray,
    y: np.ndarray,
    beta: float,
    eps_draws,
    n_train: int,
    data_term: bool = True,
):
    """Shared core for elbo_loss / loss_gradients with explicit noise draws."""
    n = E.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    S = len(eps_draws)
    C = p.n_classes
    onehot = np.eye(C)[y]
    sig_W = np.exp(0.5 * p.W_logvar)
    sig_b = np.exp(0.5 * p.b_logvar)

    ce = 0.0
    gW_mu = np.zeros_like(p.W_mu)
    gW_lv = np.zeros_like(p.W_logvar)
    gb_mu = np.zeros_like(p.b_mu)
    gb_lv = np.zeros_like(p.b_logvar)

    if data_term:
        for eps_W, eps_b in eps_draws:
            W = p.W_mu + sig_W * eps_W
            b = p.b_mu + sig_b * eps_b
            logits = E @ W.T + b
            probs = softmax(logits)
            logp = np.log(np.take_along_axis(probs, y[:, None], axis=1))
            ce += -logp.sum() / (n * S)
            dlogits = (probs - onehot) / (n * S)
            gW = dlogits.T @ E
            gb = dlogits.sum(axis=0)
            gW_mu += gW
            gb_mu += gb
            # d w / d logvar = 0.5 * sigma * eps through the reparameterization
            gW_lv += gW * 0.5 * sig_W * eps_W
            gb_lv += gb * 0.5 * sig_b * eps_b

    kl = kl_to_standard_normal(p) / n_train
    loss = ce + beta * kl
    scale = beta / n_train
    gW_mu += scale * p.W_mu
    gb_mu += scale * p.b_mu
    gW_lv += scale * 0.5 * (np.exp(p.W_logvar) - 1.0)
    gb_lv += scale * 0.5 * (np.exp(p.b_logvar) - 1.0)

    grads = VBLLParams(W_mu=gW_mu, W_logvar=gW_lv, b_mu=gb_mu, b_logvar=gb_lv)
    return float(loss), float(ce), float(kl), grads


def elbo_loss(
    p: VBLLParams,
    E_batch: np.ndarray,
    y_batch: np.ndarray,
    beta: float,
    S_train: int,
    rng: np.random.Generator | None,
    n_train: int | None = None,
) -> tuple[float, float, float]:
    """Annealed negative ELBO: (loss, ce_term, kl_term), loss = ce + beta * kl.

    kl_term is the full KL to the standard-normal prior divided by n_train
    (per-example scale). rng=None forces eps = 0.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    if S_train < 1:
        raise ValueError("need at least one weight sample")
    n_train = E_batch.shape[0] if n_train is None else n_train
    eps_draws = _draw_eps(p, S_train, rng)
    loss, ce, kl, _ = _loss_and_grads(p, E_batch, y_batch, beta, eps_draws, n_train)
    return loss, ce, kl


def loss_gradients(
    p: VBLLParams,
    E_batch: np.ndarray,
    y_batch: np.ndarray,
    beta: float,
    S_train: int,
    rng: np.random.Generator | None,
    n_train: int | None = None,
    data_term: bool = True,
) -> VBLLParams:
    """Analytic gradients of elbo_loss, matching the eps draws the same rng
    state would give elbo_loss. data_term=False isolates the KL part.
    """
    n_train = E_batch.shape[0] if n_train is None else n_train
    eps_draws = _draw_eps(p, S_train, rng)
    _, _, _, grads = _loss_and_grads(
        p, E_batch, y_batch, beta, eps_draws, n_train, data_term=data_term
    )
    return grads


def predictive_probs(
    p: VBLLParams, E: np.ndarray, S_eval: int, rng: np.random.Generator
) -> np.ndarray:
    """Monte-Carlo predictive: mean softmax over S_eval weight samples."""
    if S_eval < 1:
        raise ValueError("need at least one evaluation sample")
    acc = np.zeros((E.shape[0], p.n_classes))
    for _ in range(S_eval):
        s = sample_weights(p, rng)
        acc += softmax(E @ s.W.T + s.b)
    return acc / S_eval


def map_predictive(p: VBLLParams, E: np.ndarray) -> np.ndarray:
    """Deterministic predictive using posterior means only."""
    E = np.asarray(E, dtype=np.float64)
    if E.shape[1] != p.in_dim:
        raise ValueError(f"expected {p.in_dim} features, got {E.shape[1]}")
    return softmax(E @ p.W_mu.T + p.b_mu)


def save_model(p: VBLLParams, config: TrainConfig, path) -> None:
    """Binary model format: magic "VBLM", u32 version, u32 C, u32 H, the four
    parameter arrays as little-endian f64 row-major, then the training config
    as a key=value text trailer."""
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<III", MODEL_VERSION, p.n_classes, p.in_dim))
        for arr in (p.W_mu, p.W_logvar, p.b_mu, p.b_logvar):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        trailer = "".join(
            f"{k}={v}\n" for k, v in sorted(vars(config).items())
        )
        f.write(trailer.encode("utf-8"))


def load_model(path) -> tuple[VBLLParams, dict[str, str]]:
    with open(path, "rb") as f:
        if f.read(4) != MODEL_MAGIC:
            raise ValueError(f"not a model file: {path}")
        version, C, H = struct.unpack("<III", f.read(12))
        if version != MODEL_VERSION:
            raise ValueError(f"unsupported model version {version}")
        shapes = [(C, H), (C, H), (C,), (C,)]
        arrays = []
        for shape in shapes:
            count = int(np.prod(shape))
            buf = f.read(8 * count)
            if len(buf) < 8 * count:
                raise ValueError("truncated model file")
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
        trailer = f.read().decode("utf-8")
    config = dict(
        line.split("=", 1) for line in trailer.splitlines() if "=" in line
    )
    return VBLLParams(*arrays), config
