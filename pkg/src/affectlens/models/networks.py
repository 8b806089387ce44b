"""EC_CNN, EC_LSTM and the sentence-vector concat head, forward and backward.

Weights are stored input-major: a dense layer ``W`` has shape (fan_in, fan_out)
and computes ``x @ W + b``. Word embeddings are frozen, so no gradient flows
into the token matrices.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

MODEL_KINDS = ("head", "cnn", "lstm")
KERNEL_WIDTHS = (2, 3, 4, 5, 6)
MIN_SEQ_LEN = max(KERNEL_WIDTHS)
HEAD_THRESHOLD = 0.33
SIGMOID_THRESHOLD = 0.5


class ShapeError(ValueError):
    pass


def sigmoid(x):
    return expit(np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class ModelSpec:
    """Dimensions of one model variant.

    ``input_dim`` is the sentence-vector width for the head and the word
    embedding width for the CNN/LSTM.
    """

    kind: str
    input_dim: int
    lex_dim: int
    n_labels: int
    filters: int = 64
    hidden: int = 128
    lstm_units: int = 256

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        for name in ("input_dim", "n_labels", "filters", "hidden", "lstm_units"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.lex_dim < 0:
            raise ValueError("lex_dim must be non-negative")

    @property
    def head_input_dim(self) -> int:
        return self.input_dim + self.lex_dim

    @property
    def merged_dim(self) -> int:
        if self.kind == "cnn":
            return len(KERNEL_WIDTHS) * self.filters + self.lex_dim
        if self.kind == "lstm":
            return self.lstm_units + self.lex_dim
        return self.head_input_dim

    def to_dict(self) -> dict:
        return asdict(self)


def param_shapes(spec: ModelSpec) -> dict[str, tuple[int, ...]]:
    """Parameter names and shapes in canonical (serialization) order."""
    L = spec.n_labels
    if spec.kind == "head":
        return {"out.W": (spec.head_input_dim, L), "out.b": (L,)}
    shapes: dict[str, tuple[int, ...]] = {}
    if spec.kind == "cnn":
        for w in KERNEL_WIDTHS:
            shapes[f"conv{w}.W"] = (w, spec.input_dim, spec.filters)
            shapes[f"conv{w}.b"] = (spec.filters,)
    else:
        H = spec.lstm_units
        shapes["lstm.Wx"] = (spec.input_dim, 4 * H)
        shapes["lstm.Wh"] = (H, 4 * H)
        shapes["lstm.b"] = (4 * H,)
    shapes["hidden.W"] = (spec.merged_dim, spec.hidden)
    shapes["hidden.b"] = (spec.hidden,)
    shapes["out.W"] = (spec.hidden, L)
    shapes["out.b"] = (L,)
    return shapes


def _fan_in(spec: ModelSpec, name: str) -> int:
    layer = name.split(".")[0]
    if layer.startswith("conv"):
        return int(layer[4:]) * spec.input_dim
    if layer == "lstm":
        return spec.input_dim + spec.lstm_units
    if layer == "hidden":
        return spec.merged_dim
    return spec.hidden if spec.kind != "head" else spec.head_input_dim


def init_params(spec: ModelSpec, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) for every array, drawn in canonical order."""
    params = {}
    for name, shape in param_shapes(spec).items():
        bound = np.sqrt(1.0 / _fan_in(spec, name))
        params[name] = rng.uniform(-bound, bound, size=shape)
    return params


def zero_params(spec: ModelSpec) -> dict[str, np.ndarray]:
    return {name: np.zeros(shape) for name, shape in param_shapes(spec).items()}


def check_params(spec: ModelSpec, params: dict[str, np.ndarray]) -> None:
    expected = param_shapes(spec)
    if set(params) != set(expected):
        raise ShapeError(f"parameter names {sorted(params)} != {sorted(expected)}")
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise ShapeError(f"{name}: shape {params[name].shape} != {shape}")


# --------------------------------------------------------------------------
# shared dense tail: merged -> hidden (ReLU) -> out (sigmoid)
# --------------------------------------------------------------------------

def _tail_forward(merged, params):
    pre = merged @ params["hidden.W"] + params["hidden.b"]
    h = np.maximum(pre, 0.0)
    z = h @ params["out.W"] + params["out.b"]
    s = sigmoid(z)
    return s, (merged, pre, h, s)


def _tail_backward(cache, dscores, grads, params):
    merged, pre, h, s = cache
    dz = dscores * s * (1.0 - s)
    grads["out.W"] += np.outer(h, dz)
    grads["out.b"] += dz
    dpre = (dz @ params["out.W"].T) * (pre > 0)
    grads["hidden.W"] += np.outer(merged, dpre)
    grads["hidden.b"] += dpre
    return dpre @ params["hidden.W"].T


# --------------------------------------------------------------------------
# CNN
# --------------------------------------------------------------------------

def pad_sequence(x: np.ndarray, min_len: int = MIN_SEQ_LEN) -> np.ndarray:
    n, d = x.shape
    if n >= min_len:
        return x
    return np.vstack([x, np.zeros((min_len - n, d))])


def cnn_forward_one(x, lex, params, spec: ModelSpec):
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeError(f"token matrix must be (n, {spec.input_dim}), got {x.shape}")
    if lex.shape != (spec.lex_dim,):
        raise ShapeError(f"lexicon features must be ({spec.lex_dim},), got {lex.shape}")
    x = pad_sequence(x)
    d = spec.input_dim
    pools, branches = [], []
    for w in KERNEL_WIDTHS:
        windows = sliding_window_view(x, (w, d))[:, 0].reshape(-1, w * d)
        conv = windows @ params[f"conv{w}.W"].reshape(w * d, -1) + params[f"conv{w}.b"]
        act = np.maximum(conv, 0.0)
        idx = act.argmax(axis=0)
        pools.append(act[idx, np.arange(act.shape[1])])
        branches.append((w, windows, conv, idx))
    merged = np.concatenate(pools + [lex])
    s, tail = _tail_forward(merged, params)
    return s, (branches, tail)


def cnn_backward_one(cache, dscores, grads, params, spec: ModelSpec):
    branches, tail = cache
    dmerged = _tail_backward(tail, dscores, grads, params)
    F = spec.filters
    cols = np.arange(F)
    for k, (w, windows, conv, idx) in enumerate(branches):
        dpool = dmerged[k * F:(k + 1) * F] * (conv[idx, cols] > 0)
        dconv = np.zeros_like(conv)
        dconv[idx, cols] = dpool
        grads[f"conv{w}.W"] += (windows.T @ dconv).reshape(w, spec.input_dim, F)
        grads[f"conv{w}.b"] += dconv.sum(axis=0)


# --------------------------------------------------------------------------
# LSTM (gate order: input, forget, cell, output)
# --------------------------------------------------------------------------

def lstm_forward_one(x, lex, params, spec: ModelSpec):
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ShapeError(f"token matrix must be (n, {spec.input_dim}), got {x.shape}")
    if lex.shape != (spec.lex_dim,):
        raise ShapeError(f"lexicon features must be ({spec.lex_dim},), got {lex.shape}")
    H = spec.lstm_units
    Wh = params["lstm.Wh"]
    xproj = x @ params["lstm.Wx"] + params["lstm.b"]
    h = np.zeros(H)
    c = np.zeros(H)
    steps = []
    for a_x in xproj:
        a = a_x + h @ Wh
        i = sigmoid(a[:H])
        f = sigmoid(a[H:2 * H])
        g = np.tanh(a[2 * H:3 * H])
        o = sigmoid(a[3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        steps.append((h, c, i, f, g, o, tc))
        h, c = o * tc, c_new
    merged = np.concatenate([h, lex])
    s, tail = _tail_forward(merged, params)
    return s, (x, steps, tail)


def lstm_backward_one(cache, dscores, grads, params, spec: ModelSpec):
    x, steps, tail = cache
    dmerged = _tail_backward(tail, dscores, grads, params)
    H = spec.lstm_units
    dh = dmerged[:H].copy()
    dc = np.zeros(H)
    Wh = params["lstm.Wh"]
    if not steps:
        return
    da_rows = np.empty((len(steps), 4 * H))
    for t in range(len(steps) - 1, -1, -1):
        h_prev, c_prev, i, f, g, o, tc = steps[t]
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc ** 2)
        da = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dc * i * (1.0 - g ** 2),
            do * o * (1.0 - o),
        ])
        da_rows[t] = da
        dh = Wh @ da
        dc = dc * f
    h_prevs = np.vstack([st[0] for st in steps])
    grads["lstm.Wx"] += x.T @ da_rows
    grads["lstm.Wh"] += h_prevs.T @ da_rows
    grads["lstm.b"] += da_rows.sum(axis=0)


# --------------------------------------------------------------------------
# concat head: tanh(W . [sentence ; lexicon] + b)
# --------------------------------------------------------------------------

def head_forward(sent, lex, params, spec: ModelSpec):
    sent = np.atleast_2d(sent)
    lex = np.atleast_2d(lex)
    if sent.shape[1] != spec.input_dim or lex.shape[1] != spec.lex_dim:
        raise ShapeError(
            f"head expects {spec.input_dim}+{spec.lex_dim} inputs, "
            f"got {sent.shape[1]}+{lex.shape[1]}"
        )
    if sent.shape[0] != lex.shape[0]:
        raise ShapeError("sentence and lexicon batches differ in length")
    x = np.hstack([sent, lex])
    a = np.tanh(x @ params["out.W"] + params["out.b"])
    return a, (x, a)


def head_backward(cache, dact, grads):
    x, a = cache
    dz = dact * (1.0 - a ** 2)
    grads["out.W"] += x.T @ dz
    grads["out.b"] += dz.sum(axis=0)


# --------------------------------------------------------------------------
# model wrapper
# --------------------------------------------------------------------------

class EmotionModel:
    """One EC variant: spec plus parameter arrays.

    Batches are ``(inputs, lex)`` where ``inputs`` is an (B, E) sentence-vector
    array for the head and a list of (n_i, d) token matrices otherwise, and
    ``lex`` is the (B, P) lexicon feature matrix.
    """

    def __init__(self, spec: ModelSpec, params: dict[str, np.ndarray]):
        check_params(spec, params)
        self.spec = spec
        self.params = params

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def threshold(self) -> float:
        return HEAD_THRESHOLD if self.kind == "head" else SIGMOID_THRESHOLD

    def forward(self, inputs, lex):
        lex = np.atleast_2d(np.asarray(lex, dtype=np.float64))
        if self.kind == "head":
            return head_forward(np.asarray(inputs, dtype=np.float64), lex, self.params, self.spec)
        if len(inputs) != lex.shape[0]:
            raise ShapeError("token batch and lexicon batch differ in length")
        fwd = cnn_forward_one if self.kind == "cnn" else lstm_forward_one
        outs, caches = [], []
        for x, f in zip(inputs, lex):
            s, cache = fwd(np.asarray(x, dtype=np.float64).reshape(-1, self.spec.input_dim), f, self.params, self.spec)
            outs.append(s)
            caches.append(cache)
        scores = np.vstack(outs) if outs else np.zeros((0, self.spec.n_labels))
        return scores, caches

    def backward(self, cache, dscores) -> dict[str, np.ndarray]:
        """Gradients of a loss given its derivative w.r.t. the output scores."""
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        if self.kind == "head":
            head_backward(cache, dscores, grads)
            return grads
        bwd = cnn_backward_one if self.kind == "cnn" else lstm_backward_one
        for c, ds in zip(cache, dscores):
            bwd(c, ds, grads, self.params, self.spec)
        return grads

    def scores(self, inputs, lex) -> np.ndarray:
        return self.forward(inputs, lex)[0]

    def predict(self, inputs, lex) -> np.ndarray:
        return threshold_scores(self.scores(inputs, lex), self.kind)


def threshold_scores(scores, kind: str) -> np.ndarray:
    """Strict ``>``: tanh > 0.33 for the head, sigmoid > 0.5 otherwise."""
    t = HEAD_THRESHOLD if kind == "head" else SIGMOID_THRESHOLD
    return np.asarray(scores) > t


def forward_cnn(tokens: Sequence[str], embeddings, lexicon_features, params, spec: ModelSpec) -> np.ndarray:
    x = embeddings.embed(list(tokens))
    return cnn_forward_one(x, np.asarray(lexicon_features, dtype=np.float64), params, spec)[0]


def forward_lstm(tokens: Sequence[str], embeddings, lexicon_features, params, spec: ModelSpec) -> np.ndarray:
    x = embeddings.embed(list(tokens))
    return lstm_forward_one(x, np.asarray(lexicon_features, dtype=np.float64), params, spec)[0]


def forward_head(sentence_vector, lexicon_features, params, spec: ModelSpec) -> np.ndarray:
    return head_forward(sentence_vector, lexicon_features, params, spec)[0][0]
