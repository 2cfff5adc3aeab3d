"""Convolutional-LSTM relation classifier, written out by hand.

Pipeline per instance: embedding columns [start entity | filtered context |
end entity] -> right zero-padding to the corpus maximum length -> 1-D
convolution (ReLU) -> the column sequence of feature maps -> LSTM -> dropout
-> softmax over the six classes. Trained with mini-batch cross-entropy and
Adam; the embedding table is read-only throughout. All arithmetic is float64
and every forward/backward step is an explicit numpy expression, so gradients
can be checked against finite differences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import modelio
from .corpus import (
    LABELS,
    FrequencyTable,
    RelationInstance,
    RelationLabel,
    build_lemma_counts,
    extract_context,
    filter_context,
)
from .embeddings import EmbeddingTable

log = logging.getLogger(__name__)

CLSTM_FORMAT = "relclass-clstm"

# parameter tensors in a fixed order (serialization, Adam state, grad checks)
PARAM_NAMES = (
    "conv_w", "conv_b",
    "w_i", "u_i", "b_i",
    "w_f", "u_f", "b_f",
    "w_o", "u_o", "b_o",
    "w_g", "u_g", "b_g",
    "soft_w", "soft_b",
)


@dataclass(frozen=True)
class Hyperparams:
    """Architecture and training settings.

    Ranges are enforced by the search space, not here: tiny
    out-of-range models are legitimate in tests.
    """

    num_filters: int = 384
    filter_width: int = 3
    rnn_units: int = 93
    dropout_rate: float = 0.23
    l2_scale: float = 0.79
    stride: int = 1
    learning_rate: float = 0.002
    batch_size: int = 128
    epochs: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_filters < 1 or self.rnn_units < 1:
            raise ValueError("num_filters and rnn_units must be positive")
        if self.filter_width < 1 or self.stride < 1:
            raise ValueError("filter_width and stride must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.l2_scale < 0.0:
            raise ValueError("l2_scale must be nonnegative")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")

    def to_dict(self) -> dict:
        return {
            "num_filters": self.num_filters,
            "filter_width": self.filter_width,
            "rnn_units": self.rnn_units,
            "dropout_rate": self.dropout_rate,
            "l2_scale": self.l2_scale,
            "stride": self.stride,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "seed": self.seed,
        }


def build_sequence(
    inst: RelationInstance,
    table: EmbeddingTable,
    freq: FrequencyTable,
    threshold: int = 5,
) -> np.ndarray:
    """Embedding matrix I of shape (v, l_s): start entity, filtered context
    words in order, end entity. Entity columns are token-average vectors."""
    cols = [table.phrase_vector(inst.start_tokens)]
    for tok in filter_context(extract_context(inst), freq, threshold):
        cols.append(table.lookup(tok.lemma))
    cols.append(table.phrase_vector(inst.end_tokens))
    return np.column_stack(cols)


def pad(I: np.ndarray, l_max: int) -> np.ndarray:
    """Right-pad with zero columns up to l_max."""
    v, l_s = I.shape
    if l_s > l_max:
        raise ValueError(f"sequence length {l_s} exceeds l_max {l_max}")
    out = np.zeros((v, l_max), dtype=np.float64)
    out[:, :l_s] = I
    return out


def n_windows(l_max: int, ws: int, st: int) -> int:
    if ws > l_max:
        raise ValueError(f"filter width {ws} exceeds padded length {l_max}")
    return (l_max - ws) // st + 1


def conv1d(I_pad: np.ndarray, filters: np.ndarray, bias: np.ndarray, st: int = 1) -> np.ndarray:
    """ReLU 1-D convolution over the column axis.

    ``filters`` has shape (k, v*ws); window j covers columns j*st .. j*st+ws-1,
    flattened column-major. Returns the k x m feature-map matrix.
    """
    v, l_max = I_pad.shape
    k, flat = filters.shape
    if flat % v != 0:
        raise ValueError("filter length is not a multiple of the embedding dimension")
    ws = flat // v
    m = n_windows(l_max, ws, st)
    out = np.empty((k, m), dtype=np.float64)
    for j in range(m):
        window = I_pad[:, j * st : j * st + ws].reshape(-1, order="F")
        out[:, j] = filters @ window + bias
    return np.maximum(out, 0.0)


def split_maps(C: np.ndarray) -> list[np.ndarray]:
    """Columns of the feature-map matrix as a sequence of R^k vectors."""
    return [C[:, j].copy() for j in range(C.shape[1])]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_forward(xs: Sequence[np.ndarray], params: dict[str, np.ndarray]) -> np.ndarray:
    """Final hidden state of a standard LSTM over the input sequence.

    Gates use the logistic sigmoid, candidate and cell output use tanh,
    h_0 = c_0 = 0.
    """
    if len(xs) == 0:
        raise ValueError("empty input sequence")
    u = params["b_i"].shape[0]
    h = np.zeros(u)
    c = np.zeros(u)
    for x in xs:
        i = _sigmoid(params["w_i"] @ x + params["u_i"] @ h + params["b_i"])
        f = _sigmoid(params["w_f"] @ x + params["u_f"] @ h + params["b_f"])
        o = _sigmoid(params["w_o"] @ x + params["u_o"] @ h + params["b_o"])
        g = np.tanh(params["w_g"] @ x + params["u_g"] @ h + params["b_g"])
        c = f * c + i * g
        h = o * np.tanh(c)
    return h


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def classify(
    h: np.ndarray,
    soft_w: np.ndarray,
    soft_b: np.ndarray,
    dropout_rate: float = 0.0,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Class distribution from a sentence representation.

    At training time an inverted-scaling dropout mask is applied to h first;
    inference never drops.
    """
    if training and dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training-time dropout needs an RNG")
        keep = 1.0 - dropout_rate
        h = h * (rng.random(h.shape) < keep) / keep
    return softmax(h @ soft_w.T + soft_b)


def init_params(
    v: int, hyper: Hyperparams, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Uniform [-0.1, 0.1] weights, zero biases, forget-gate bias 1.0."""
    k, u = hyper.num_filters, hyper.rnn_units
    ws = hyper.filter_width
    n_classes = len(LABELS)

    def w(*shape: int) -> np.ndarray:
        return rng.uniform(-0.1, 0.1, size=shape)

    params = {
        "conv_w": w(k, v * ws),
        "conv_b": np.zeros(k),
        "w_i": w(u, k), "u_i": w(u, u), "b_i": np.zeros(u),
        "w_f": w(u, k), "u_f": w(u, u), "b_f": np.ones(u),
        "w_o": w(u, k), "u_o": w(u, u), "b_o": np.zeros(u),
        "w_g": w(u, k), "u_g": w(u, u), "b_g": np.zeros(u),
        "soft_w": w(n_classes, u),
        "soft_b": np.zeros(n_classes),
    }
    return params


# ---------------------------------------------------------------------------
# batched forward/backward

@dataclass
class ForwardCache:
    """Everything the backward pass needs, for one batch."""

    batch: np.ndarray  # (B, v, l_max) padded inputs
    windows: list[np.ndarray]  # m arrays (B, v*ws), column-major flattened
    pre_relu: list[np.ndarray]  # m arrays (B, k)
    xs: list[np.ndarray]  # m arrays (B, k), post-ReLU
    gates: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]  # i,f,o,g per step
    cells: list[np.ndarray]  # c_t per step, (B, u)
    hiddens: list[np.ndarray]  # h_t per step, (B, u)
    mask: np.ndarray  # dropout mask incl. inverted scaling, (B, u)
    h_drop: np.ndarray  # (B, u)
    probs: np.ndarray  # (B, n_classes)


def forward_batch(
    batch: np.ndarray,
    params: dict[str, np.ndarray],
    hyper: Hyperparams,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> ForwardCache:
    B, v, l_max = batch.shape
    k = hyper.num_filters
    ws, st = hyper.filter_width, hyper.stride
    m = n_windows(l_max, ws, st)
    u = hyper.rnn_units

    windows, pre_relu, xs = [], [], []
    for j in range(m):
        seg = batch[:, :, j * st : j * st + ws]
        flat = seg.transpose(0, 2, 1).reshape(B, ws * v)  # column-major per instance
        z = flat @ params["conv_w"].T + params["conv_b"]
        windows.append(flat)
        pre_relu.append(z)
        xs.append(np.maximum(z, 0.0))

    h = np.zeros((B, u))
    c = np.zeros((B, u))
    gates, cells, hiddens = [], [], []
    for x in xs:
        i = _sigmoid(x @ params["w_i"].T + h @ params["u_i"].T + params["b_i"])
        f = _sigmoid(x @ params["w_f"].T + h @ params["u_f"].T + params["b_f"])
        o = _sigmoid(x @ params["w_o"].T + h @ params["u_o"].T + params["b_o"])
        g = np.tanh(x @ params["w_g"].T + h @ params["u_g"].T + params["b_g"])
        c = f * c + i * g
        h = o * np.tanh(c)
        gates.append((i, f, o, g))
        cells.append(c)
        hiddens.append(h)

    if training and hyper.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training-time dropout needs an RNG")
        keep = 1.0 - hyper.dropout_rate
        mask = (rng.random((B, u)) < keep) / keep
    else:
        mask = np.ones((B, u))
    h_drop = h * mask
    probs = softmax(h_drop @ params["soft_w"].T + params["soft_b"])
    return ForwardCache(batch, windows, pre_relu, xs, gates, cells, hiddens, mask, h_drop, probs)


def batch_loss(cache: ForwardCache, gold: np.ndarray, params: dict[str, np.ndarray], l2_scale: float) -> float:
    """Mean cross-entropy plus the softmax-weight L2 penalty."""
    B = gold.shape[0]
    ce = -np.log(cache.probs[np.arange(B), gold]).mean()
    return float(ce + l2_scale * 0.5 * float(np.sum(params["soft_w"] ** 2)))


def backward_batch(
    cache: ForwardCache,
    gold: np.ndarray,
    params: dict[str, np.ndarray],
    hyper: Hyperparams,
) -> dict[str, np.ndarray]:
    """Analytic gradients of batch_loss for every trainable tensor."""
    B = gold.shape[0]
    m = len(cache.xs)
    u = hyper.rnn_units

    dlogits = cache.probs.copy()
    dlogits[np.arange(B), gold] -= 1.0
    dlogits /= B

    grads = {name: np.zeros_like(params[name]) for name in PARAM_NAMES}
    grads["soft_w"] = dlogits.T @ cache.h_drop + hyper.l2_scale * params["soft_w"]
    grads["soft_b"] = dlogits.sum(axis=0)

    dh = (dlogits @ params["soft_w"]) * cache.mask
    dc = np.zeros((B, u))
    dxs = [None] * m
    for t_step in range(m - 1, -1, -1):
        i, f, o, g = cache.gates[t_step]
        c = cache.cells[t_step]
        c_prev = cache.cells[t_step - 1] if t_step > 0 else np.zeros((B, u))
        h_prev = cache.hiddens[t_step - 1] if t_step > 0 else np.zeros((B, u))
        tanh_c = np.tanh(c)
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        da_i = di * i * (1.0 - i)
        da_f = df * f * (1.0 - f)
        da_o = do * o * (1.0 - o)
        da_g = dg * (1.0 - g**2)
        x = cache.xs[t_step]
        grads["w_i"] += da_i.T @ x
        grads["w_f"] += da_f.T @ x
        grads["w_o"] += da_o.T @ x
        grads["w_g"] += da_g.T @ x
        grads["u_i"] += da_i.T @ h_prev
        grads["u_f"] += da_f.T @ h_prev
        grads["u_o"] += da_o.T @ h_prev
        grads["u_g"] += da_g.T @ h_prev
        grads["b_i"] += da_i.sum(axis=0)
        grads["b_f"] += da_f.sum(axis=0)
        grads["b_o"] += da_o.sum(axis=0)
        grads["b_g"] += da_g.sum(axis=0)
        dxs[t_step] = (
            da_i @ params["w_i"] + da_f @ params["w_f"]
            + da_o @ params["w_o"] + da_g @ params["w_g"]
        )
        dc = dc * f
        dh = (
            da_i @ params["u_i"] + da_f @ params["u_f"]
            + da_o @ params["u_o"] + da_g @ params["u_g"]
        )

    for t_step in range(m):
        dz = dxs[t_step] * (cache.pre_relu[t_step] > 0)
        grads["conv_w"] += dz.T @ cache.windows[t_step]
        grads["conv_b"] += dz.sum(axis=0)
    return grads


# ---------------------------------------------------------------------------
# Adam

@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={name: np.zeros_like(p) for name, p in params.items()},
            v={name: np.zeros_like(p) for name, p in params.items()},
            t=0,
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float = 0.002,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One in-place Adam update with bias correction."""
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for name, g in grads.items():
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g**2
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        params[name] -= lr * m_hat / (np.sqrt(v_hat) + eps)


# ---------------------------------------------------------------------------
# model + training loop

@dataclass(frozen=True)
class ClstmModel:
    params: dict[str, np.ndarray]
    hyper: Hyperparams
    l_max: int
    freq: FrequencyTable
    freq_threshold: int
    table: EmbeddingTable
    loss_history: tuple[float, ...] = field(default=(), compare=False)

    def _padded(self, inst: RelationInstance) -> np.ndarray:
        I = build_sequence(inst, self.table, self.freq, self.freq_threshold)
        if I.shape[1] > self.l_max:
            log.warning(
                "instance %s: sequence length %d exceeds training maximum %d, truncating",
                inst.id, I.shape[1], self.l_max,
            )
            I = I[:, : self.l_max]
        return pad(I, self.l_max)

    def predict_proba_many(self, instances: Sequence[RelationInstance]) -> np.ndarray:
        if not instances:
            return np.zeros((0, len(LABELS)))
        batch = np.stack([self._padded(inst) for inst in instances])
        cache = forward_batch(batch, self.params, self.hyper, training=False)
        return cache.probs

    def predict_proba(self, inst: RelationInstance) -> dict[RelationLabel, float]:
        row = self.predict_proba_many([inst])[0]
        return {label: float(p) for label, p in zip(LABELS, row)}

    def predict_many(self, instances: Sequence[RelationInstance]) -> list[RelationLabel]:
        probs = self.predict_proba_many(instances)
        return [LABELS[int(np.argmax(row))] for row in probs]

    def predict(self, inst: RelationInstance) -> RelationLabel:
        return self.predict_many([inst])[0]


def train(
    instances: Sequence[RelationInstance],
    table: EmbeddingTable,
    hyper: Hyperparams,
    freq_threshold: int = 5,
) -> ClstmModel:
    """Train on a labeled corpus; bitwise deterministic for a fixed seed.

    RNG order is fixed: parameter init, then per epoch one shuffle, then one
    dropout mask per batch.
    """
    labeled = [inst for inst in instances if inst.label is not None]
    if not labeled:
        raise ValueError("no labeled instances")
    if len(labeled) != len(instances):
        raise ValueError("training corpus contains unlabeled instances")
    freq = build_lemma_counts(labeled)
    sequences = [build_sequence(inst, table, freq, freq_threshold) for inst in labeled]
    l_max = max(seq.shape[1] for seq in sequences)
    if hyper.filter_width > l_max:
        raise ValueError(
            f"filter width {hyper.filter_width} exceeds the longest sequence ({l_max})"
        )
    padded = np.stack([pad(seq, l_max) for seq in sequences])
    label_idx = {label: i for i, label in enumerate(LABELS)}
    gold = np.array([label_idx[inst.label] for inst in labeled], dtype=np.int64)

    rng = np.random.default_rng(hyper.seed)
    params = init_params(table.dim, hyper, rng)
    state = AdamState.zeros_like(params)
    history = []
    n = len(labeled)
    for _ in range(hyper.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, hyper.batch_size):
            idx = order[start : start + hyper.batch_size]
            cache = forward_batch(padded[idx], params, hyper, training=True, rng=rng)
            epoch_losses.append(batch_loss(cache, gold[idx], params, hyper.l2_scale))
            grads = backward_batch(cache, gold[idx], params, hyper)
            adam_step(params, grads, state, lr=hyper.learning_rate)
        history.append(float(np.mean(epoch_losses)))
    return ClstmModel(
        params=params,
        hyper=hyper,
        l_max=l_max,
        freq=freq,
        freq_threshold=freq_threshold,
        table=table,
        loss_history=tuple(history),
    )


# ---------------------------------------------------------------------------
# model file

def save_clstm_model(model: ClstmModel, path: str | Path) -> None:
    payload = {
        "format": CLSTM_FORMAT,
        "version": 1,
        "labels": [label.value for label in LABELS],
        "hyper": model.hyper.to_dict(),
        "l_max": model.l_max,
        "freq_threshold": model.freq_threshold,
        "freq": dict(sorted(model.freq.items())),
        "embedding": {"name": model.table.name, "dim": model.table.dim},
        "params": {name: modelio.encode_array(model.params[name]) for name in PARAM_NAMES},
    }
    modelio.save_json(payload, path)


def load_clstm_model(path: str | Path, table: EmbeddingTable) -> ClstmModel:
    payload = modelio.load_json(path, CLSTM_FORMAT)
    if payload["labels"] != [label.value for label in LABELS]:
        raise modelio.ModelFormatError(f"{path}: unexpected label list")
    emb = payload["embedding"]
    if emb["dim"] != table.dim:
        raise modelio.ModelFormatError(
            f"{path}: model expects {emb['dim']}-dim embeddings, table has {table.dim}"
        )
    if emb["name"] and table.name and emb["name"] != table.name:
        log.warning(
            "embedding table name mismatch: model trained with %r, predicting with %r",
            emb["name"], table.name,
        )
    params = {
        name: modelio.decode_array(payload["params"][name]).copy() for name in PARAM_NAMES
    }
    return ClstmModel(
        params=params,
        hyper=Hyperparams(**payload["hyper"]),
        l_max=payload["l_max"],
        freq=FrequencyTable(payload["freq"]),
        freq_threshold=payload["freq_threshold"],
        table=table,
    )
