"""Feedforward softmax classifier with hand-rolled backpropagation.

Hidden layers use ELU activation and (inverted) dropout; the output
layer is softmax, so cumulative class probabilities are automatically a
monotone CDF over the ordered bins. Two objectives are supported:

* ``multinomial`` -- standard cross-entropy over the m+1 bins.
* ``jbce`` -- joint binary cross-entropy: at every interior cut-point,
  binary cross-entropy between the indicator I(Y <= c_j) and the
  cumulative probability F_j = p_1 + ... + p_j, summed over cut-points.

With no hidden layers the model is multinomial logistic regression.
Targets are 1-based bin indices, matching Partition.bin_index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

LOSSES = ("multinomial", "jbce")


class TrainingError(RuntimeError):
    """Training diverged (non-finite loss)."""


@dataclass(frozen=True)
class NetworkConfig:
    input_dim: int
    output_dim: int
    hidden_sizes: tuple[int, ...] = (100, 100, 100)
    dropout_rate: float = 0.5
    activation: str = "elu"  # "elu" or "identity"

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.output_dim < 2:
            raise ValueError(f"output_dim must be >= 2, got {self.output_dim}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.activation not in ("elu", "identity"):
            raise ValueError(f"unknown activation {self.activation!r}")
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))


@dataclass(frozen=True)
class TrainConfig:
    loss: str = "jbce"
    epochs: int = 200
    batch_size: int = 64
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    log_clip_eps: float = 1e-12

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class Network:
    config: NetworkConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    loss: str | None = None  # objective the network was trained under

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {
            "config": {
                "input_dim": self.config.input_dim,
                "output_dim": self.config.output_dim,
                "hidden_sizes": list(self.config.hidden_sizes),
                "dropout_rate": self.config.dropout_rate,
                "activation": self.config.activation,
            },
            "layers": [{"w": w.tolist(), "b": b.tolist()}
                       for w, b in zip(self.weights, self.biases)],
            "loss": self.loss,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        c = d["config"]
        cfg = NetworkConfig(input_dim=int(c["input_dim"]),
                            output_dim=int(c["output_dim"]),
                            hidden_sizes=tuple(c["hidden_sizes"]),
                            dropout_rate=float(c["dropout_rate"]),
                            activation=c["activation"])
        ws = [np.asarray(layer["w"], dtype=float) for layer in d["layers"]]
        bs = [np.asarray(layer["b"], dtype=float) for layer in d["layers"]]
        return cls(cfg, ws, bs, loss=d.get("loss"))

    @classmethod
    def from_json(cls, s: str) -> "Network":
        return cls.from_dict(json.loads(s))


def init_network(cfg: NetworkConfig, seed) -> Network:
    """Zero-bias network with N(0, 1/fan_in) weights, deterministic in seed."""
    rng = np.random.default_rng(seed)
    dims = [cfg.input_dim, *cfg.hidden_sizes, cfg.output_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in))
        biases.append(np.zeros(fan_out))
    return Network(cfg, weights, biases)


def _elu(t: np.ndarray) -> np.ndarray:
    return np.where(t >= 0, t, np.expm1(np.minimum(t, 0.0)))


def _elu_grad(t: np.ndarray) -> np.ndarray:
    return np.where(t >= 0, 1.0, np.exp(np.minimum(t, 0.0)))


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_cached(net: Network, X: np.ndarray, dropout_rng=None):
    """Forward pass keeping pre-activations and dropout masks for backprop.

    Dropout is applied (inverted, to hidden layers only) iff dropout_rng
    is given and the configured rate is positive.
    """
    cfg = net.config
    act = _elu if cfg.activation == "elu" else (lambda t: t)
    a = X
    pre, acts, masks = [], [X], []
    n_hidden = len(cfg.hidden_sizes)
    for li in range(net.n_layers):
        z = a @ net.weights[li] + net.biases[li]
        pre.append(z)
        if li < n_hidden:
            a = act(z)
            if dropout_rng is not None and cfg.dropout_rate > 0:
                keep = 1.0 - cfg.dropout_rate
                mask = (dropout_rng.random(a.shape) < keep) / keep
                a = a * mask
                masks.append(mask)
            else:
                masks.append(None)
            acts.append(a)
        else:
            a = _softmax(z)
            acts.append(a)
    return a, pre, acts, masks


def forward(net: Network, x, dropout_rng=None) -> np.ndarray:
    """Class probabilities for one input vector or a batch.

    Eval mode (dropout_rng=None) is deterministic; pass a seeded
    generator to sample a fresh dropout mask (training mode).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.shape[1] != net.config.input_dim:
        raise ValueError(f"expected {net.config.input_dim} features, got {X.shape[1]}")
    probs, *_ = _forward_cached(net, X, dropout_rng)
    return probs[0] if single else probs


def loss_multinomial(probs, target, clip: float = 1e-12):
    """Negative log-likelihood of the target bin; target is 1-based."""
    probs = np.asarray(probs, dtype=float)
    if probs.ndim == 1:
        return -np.log(max(probs[int(target) - 1], clip))
    t = np.asarray(target, dtype=int) - 1
    picked = probs[np.arange(len(t)), t]
    return -np.log(np.maximum(picked, clip))


def loss_jbce(probs, target, clip: float = 1e-12):
    """Sum of binary cross-entropies at the m cut-points.

    F_j is the cumulative probability of the first j bins; the target
    contributes I(target <= j) at each cut-point j = 1..m.
    """
    probs = np.asarray(probs, dtype=float)
    single = probs.ndim == 1
    P = probs[None, :] if single else probs
    t = np.atleast_1d(np.asarray(target, dtype=int))
    m = P.shape[1] - 1
    if m < 1:
        raise ValueError("need at least 2 bins for the JBCE loss")
    F = np.clip(np.cumsum(P, axis=1)[:, :m], clip, 1.0 - clip)
    below = t[:, None] <= np.arange(1, m + 1)[None, :]
    loss = -np.where(below, np.log(F), np.log1p(-F)).sum(axis=1)
    return float(loss[0]) if single else loss


def _grad_logits(P: np.ndarray, t: np.ndarray, loss: str, clip: float) -> np.ndarray:
    """Gradient of the mean per-observation loss w.r.t. the logits."""
    n, d = P.shape
    if loss == "multinomial":
        G = P.copy()
        G[np.arange(n), t - 1] -= 1.0
        return G / n
    m = d - 1
    Fraw = np.cumsum(P, axis=1)[:, :m]
    F = np.clip(Fraw, clip, 1.0 - clip)
    below = t[:, None] <= np.arange(1, m + 1)[None, :]
    gF = np.where(below, -1.0 / F, 1.0 / (1.0 - F))
    # the clipped region is flat, so its gradient is zero
    gF = np.where((Fraw > clip) & (Fraw < 1.0 - clip), gF, 0.0)
    # dF_j/dp_i = I(i <= j): reverse cumulative sum, last class untouched
    gp = np.zeros_like(P)
    gp[:, :m] = np.flip(np.cumsum(np.flip(gF, axis=1), axis=1), axis=1)
    # softmax Jacobian
    gz = P * (gp - (P * gp).sum(axis=1, keepdims=True))
    return gz / n


def gradient(net: Network, X, targets, cfg: TrainConfig, dropout_rng=None):
    """Analytic gradient of the mean batch loss w.r.t. all parameters.

    Returns (grad_weights, grad_biases, mean_loss). The dropout mask, if
    any, is sampled once in the forward pass and reused in the backward
    pass.
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(targets, dtype=int)
    if X.ndim != 2 or X.shape[1] != net.config.input_dim:
        raise ValueError(f"expected batch of {net.config.input_dim}-dim rows, got shape {X.shape}")
    if len(t) != len(X) or len(t) == 0:
        raise ValueError("batch must be nonempty with matching targets")
    P, pre, acts, masks = _forward_cached(net, X, dropout_rng)
    if cfg.loss == "multinomial":
        mean_loss = float(np.mean(loss_multinomial(P, t, cfg.log_clip_eps)))
    else:
        mean_loss = float(np.mean(loss_jbce(P, t, cfg.log_clip_eps)))
    delta = _grad_logits(P, t, cfg.loss, cfg.log_clip_eps)
    gw = [None] * net.n_layers
    gb = [None] * net.n_layers
    n_hidden = len(net.config.hidden_sizes)
    for li in reversed(range(net.n_layers)):
        gw[li] = acts[li].T @ delta
        gb[li] = delta.sum(axis=0)
        if li == 0:
            break
        back = delta @ net.weights[li].T
        if masks[li - 1] is not None:
            back = back * masks[li - 1]
        if net.config.activation == "elu":
            back = back * _elu_grad(pre[li - 1])
        delta = back
    return gw, gb, mean_loss


def train(net: Network, X, targets, cfg: TrainConfig):
    """Mini-batch Adam over shuffled epochs; mutates and returns net.

    Returns (net, trace) where trace[e] is the mean training loss of
    epoch e. Raises TrainingError if the loss goes non-finite.
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(targets, dtype=int)
    if len(X) == 0:
        raise ValueError("empty training data")
    if np.any(t < 1) or np.any(t > net.config.output_dim):
        raise ValueError("targets must be 1-based bin indices within output_dim")
    rng = np.random.default_rng(cfg.seed)
    mw = [np.zeros_like(w) for w in net.weights]
    vw = [np.zeros_like(w) for w in net.weights]
    mb = [np.zeros_like(b) for b in net.biases]
    vb = [np.zeros_like(b) for b in net.biases]
    step = 0
    trace = []
    n = len(X)
    use_dropout = net.config.dropout_rate > 0 and len(net.config.hidden_sizes) > 0
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            gw, gb, batch_loss = gradient(net, X[idx], t[idx], cfg,
                                          dropout_rng=rng if use_dropout else None)
            if not np.isfinite(batch_loss):
                raise TrainingError(f"non-finite training loss at step {step}; reduce the learning rate")
            epoch_loss += batch_loss * len(idx)
            step += 1
            lr_t = cfg.learning_rate * np.sqrt(1 - cfg.adam_beta2 ** step) / (1 - cfg.adam_beta1 ** step)
            for li in range(net.n_layers):
                for p, g, mo, ve in ((net.weights[li], gw[li], mw, vw),
                                     (net.biases[li], gb[li], mb, vb)):
                    mo[li] = cfg.adam_beta1 * mo[li] + (1 - cfg.adam_beta1) * g
                    ve[li] = cfg.adam_beta2 * ve[li] + (1 - cfg.adam_beta2) * g * g
                    p -= lr_t * mo[li] / (np.sqrt(ve[li]) + cfg.adam_eps)
        trace.append(epoch_loss / n)
    net.loss = cfg.loss
    return net, trace
