"""Attention-based aspect extraction (ABAE) and aspect -> subcategory counting.

Encoder: attention logits ``e_i . (M ybar)`` over a sentence's word vectors,
``z = sum_i a_i e_i``. Decoder: ``p = softmax(W z + b)``, ``r = T^T p``.
Objective per sentence: ``sum_j max(0, 1 - r.z + r.n_j)`` over negative
sentences ``n_j`` (mean word vectors), averaged over the batch, plus
``lam * ||T_hat T_hat^T - I||_F^2`` with ``T_hat`` the row-normalized aspect
matrix. Word embeddings stay frozen.
"""

from __future__ import annotations

import bisect
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.cluster.vq import kmeans2

from .embedding_store import EmbeddingTable
from .models.optim import AdamWConfig, AdamWState, adamw_step

log = logging.getLogger(__name__)

OTHER = "other"


class AspectError(ValueError):
    pass


@dataclass
class AspectConfig:
    K: int = 14
    negatives: int = 20
    ortho: float = 0.1
    epochs: int = 15
    lr: float = 1e-3
    weight_decay: float = 0.0
    batch_size: int = 50
    normalize: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.K < 2:
            raise AspectError("K must be at least 2")
        if self.negatives < 1 or self.batch_size < 1 or self.epochs < 0:
            raise AspectError("negatives and batch_size must be positive, epochs >= 0")
        if self.lr <= 0 or self.ortho < 0:
            raise AspectError("lr must be positive and ortho non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AspectModel:
    vocab: list[str]
    E: np.ndarray  # (V, d), frozen
    T: np.ndarray  # (K, d)
    M: np.ndarray  # (d, d)
    W: np.ndarray  # (K, d)
    b: np.ndarray  # (K,)
    history: dict = field(default_factory=dict)

    def __post_init__(self):
        V, d = self.E.shape
        K = self.T.shape[0]
        if K < 2:
            raise AspectError("need at least two aspects")
        if self.T.shape != (K, d) or self.M.shape != (d, d) or self.W.shape != (K, d) or self.b.shape != (K,):
            raise AspectError("aspect model arrays have inconsistent shapes")
        if len(self.vocab) != V:
            raise AspectError("vocabulary and embedding rows differ")
        self._index = {w: i for i, w in enumerate(self.vocab)}

    @property
    def K(self) -> int:
        return self.T.shape[0]

    @property
    def params(self) -> dict[str, np.ndarray]:
        return {"T": self.T, "M": self.M, "W": self.W, "b": self.b}

    def with_params(self, params: Mapping[str, np.ndarray]) -> "AspectModel":
        return AspectModel(self.vocab, self.E, params["T"], params["M"], params["W"], params["b"], self.history)

    def encode_ids(self, tokens: Sequence[str]) -> list[int]:
        return [self._index[t] for t in tokens if t in self._index]


# --------------------------------------------------------------------------
# formulas for a single sentence
# --------------------------------------------------------------------------

def softmax(x, axis=-1):
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def attention_encode(word_vectors: np.ndarray, M: np.ndarray):
    """Attention weights over the rows of ``word_vectors`` and the pooled vector."""
    ev = np.atleast_2d(np.asarray(word_vectors, dtype=np.float64))
    if ev.shape[0] == 0:
        raise AspectError("sentence has no in-vocabulary tokens")
    ybar = ev.mean(axis=0)
    a = softmax(ev @ (M @ ybar))
    return a, a @ ev


def reconstruct(z, W, b, T):
    p = softmax(W @ z + b)
    return p, T.T @ p


def ortho_penalty(T: np.ndarray) -> float:
    Th = T / np.linalg.norm(T, axis=1, keepdims=True)
    G = Th @ Th.T - np.eye(T.shape[0])
    return float(np.sum(G * G))


def ortho_grad(T: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(T, axis=1, keepdims=True)
    Th = T / norms
    G = Th @ Th.T - np.eye(T.shape[0])
    dTh = 4.0 * G @ Th
    return (dTh - Th * np.sum(Th * dTh, axis=1, keepdims=True)) / norms


# --------------------------------------------------------------------------
# batched loss and gradients
# --------------------------------------------------------------------------

@dataclass
class AbaeBatch:
    idx: np.ndarray  # (B, n) vocab ids, padded with 0
    mask: np.ndarray  # (B, n) bool
    neg: np.ndarray  # (B, m, d) negative sentence vectors


def pad_ids(sentences: Sequence[Sequence[int]]):
    n = max(len(s) for s in sentences)
    idx = np.zeros((len(sentences), n), dtype=int)
    mask = np.zeros((len(sentences), n), dtype=bool)
    for i, s in enumerate(sentences):
        idx[i, :len(s)] = s
        mask[i, :len(s)] = True
    return idx, mask


def _encode_batch(E, M, idx, mask):
    Es = E[idx] * mask[..., None]
    counts = mask.sum(axis=1, keepdims=True)
    ybar = Es.sum(axis=1) / counts
    logits = np.einsum("bnd,de,be->bn", Es, M, ybar)
    logits = np.where(mask, logits, -np.inf)
    a = softmax(logits, axis=1)
    z = np.einsum("bn,bnd->bd", a, Es)
    return Es, ybar, a, z


def _unit(x):
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / norm, norm


def _unit_backward(xu, norm, dxu):
    return (dxu - xu * np.sum(xu * dxu, axis=-1, keepdims=True)) / norm


def abae_forward(params, E, batch: AbaeBatch, lam: float, normalize: bool = True):
    """Loss, hinge part, orthogonality part and backward cache.

    With ``normalize`` the hinge compares unit-length ``r``, ``z`` and
    negatives, so the margin cannot be met by inflating ``T``.
    """
    T, M, W, b = params["T"], params["M"], params["W"], params["b"]
    Es, ybar, a, z = _encode_batch(E, M, batch.idx, batch.mask)
    p = softmax(z @ W.T + b, axis=1)
    r = p @ T
    if normalize:
        zc, z_norm = _unit(z)
        rc, r_norm = _unit(r)
        negc = _unit(batch.neg)[0]
    else:
        zc, rc, negc = z, r, batch.neg
        z_norm = r_norm = None
    pos = np.sum(rc * zc, axis=1)
    negs = np.einsum("bd,bmd->bm", rc, negc)
    hinge = np.maximum(0.0, 1.0 - pos[:, None] + negs)
    J = float(hinge.sum(axis=1).mean())
    U = ortho_penalty(T)
    cache = (Es, ybar, a, z, p, r, zc, rc, negc, z_norm, r_norm, hinge)
    return J + lam * U, J, U, cache


def abae_loss(params, E, batch: AbaeBatch, lam: float, normalize: bool = True) -> float:
    return abae_forward(params, E, batch, lam, normalize)[0]


def abae_grads(params, E, batch: AbaeBatch, lam: float, normalize: bool = True):
    T, M, W = params["T"], params["M"], params["W"]
    loss, J, U, cache = abae_forward(params, E, batch, lam, normalize)
    Es, ybar, a, z, p, r, zc, rc, negc, z_norm, r_norm, hinge = cache
    B = z.shape[0]
    active = (hinge > 0).astype(np.float64)
    c = active.sum(axis=1, keepdims=True)
    dr = (np.einsum("bm,bmd->bd", active, negc) - c * zc) / B
    dz = -c * rc / B
    if normalize:
        dr = _unit_backward(rc, r_norm, dr)
        dz = _unit_backward(zc, z_norm, dz)
    dT = p.T @ dr + lam * ortho_grad(T)
    dp = dr @ T.T
    du = p * (dp - np.sum(p * dp, axis=1, keepdims=True))
    dW = du.T @ z
    db = du.sum(axis=0)
    dz = dz + du @ W
    da = np.einsum("bnd,bd->bn", Es, dz)
    dlog = a * (da - np.sum(a * da, axis=1, keepdims=True))
    dM = np.einsum("bn,bnd,be->de", dlog, Es, ybar)
    return loss, {"T": dT, "M": dM, "W": dW, "b": db}


# --------------------------------------------------------------------------
# training
# --------------------------------------------------------------------------

def build_vocab(corpus: Sequence[Sequence[str]], embeddings: EmbeddingTable):
    vocab = sorted({t for toks in corpus for t in toks if t in embeddings})
    if not vocab:
        raise AspectError("no corpus token has an embedding")
    E = np.vstack([embeddings.lookup(w) for w in vocab])
    return vocab, E


def kmeans_init(E: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    if E.shape[0] < K:
        raise AspectError(f"vocabulary of {E.shape[0]} words cannot seed {K} aspects")
    centroids, _ = kmeans2(E, K, minit="++", seed=rng)
    return np.asarray(centroids, dtype=np.float64)


def _sample_negatives(sent_means, batch_rows, m, rng):
    N = sent_means.shape[0]
    if N < 2:
        draws = np.zeros((len(batch_rows), m), dtype=int)
    else:
        draws = rng.integers(0, N - 1, size=(len(batch_rows), m))
        draws = draws + (draws >= np.asarray(batch_rows)[:, None])  # skip the sentence itself
    return sent_means[draws]


def train_abae(corpus: Sequence[Sequence[str]], embeddings: EmbeddingTable, config: AspectConfig) -> AspectModel:
    """Fit ABAE on tokenized sentences; sentences with no embedded token are skipped."""
    if not corpus:
        raise AspectError("empty corpus")
    vocab, E = build_vocab(corpus, embeddings)
    index = {w: i for i, w in enumerate(vocab)}
    sentences = [[index[t] for t in toks if t in index] for toks in corpus]
    sentences = [s for s in sentences if s]
    if not sentences:
        raise AspectError("empty corpus after dropping sentences without embedded tokens")
    rng = np.random.default_rng(config.seed)
    d = E.shape[1]
    T = kmeans_init(E, config.K, rng)
    bound = np.sqrt(1.0 / d)
    params = {
        "T": T,
        "M": rng.uniform(-bound, bound, size=(d, d)),
        "W": rng.uniform(-bound, bound, size=(config.K, d)),
        "b": np.zeros(config.K),
    }
    sent_means = np.vstack([E[s].mean(axis=0) for s in sentences])
    opt = AdamWConfig(lr=config.lr, weight_decay=config.weight_decay)
    state = AdamWState.zeros_like(params)
    history = {"loss": [], "ortho": [ortho_penalty(params["T"])]}
    N = len(sentences)
    for epoch in range(config.epochs):
        order = rng.permutation(N)
        total = 0.0
        for start in range(0, N, config.batch_size):
            rows = order[start:start + config.batch_size]
            idx, mask = pad_ids([sentences[i] for i in rows])
            batch = AbaeBatch(idx, mask, _sample_negatives(sent_means, rows, config.negatives, rng))
            loss, grads = abae_grads(params, E, batch, config.ortho, config.normalize)
            params, state = adamw_step(params, grads, state, opt)
            total += loss * len(rows)
        history["loss"].append(total / N)
        history["ortho"].append(ortho_penalty(params["T"]))
        log.info("abae epoch %d/%d loss %.5f", epoch + 1, config.epochs, total / N)
    return AspectModel(vocab, E, params["T"], params["M"], params["W"], params["b"], history)


# --------------------------------------------------------------------------
# inference and reporting
# --------------------------------------------------------------------------

def aspect_probs(model: AspectModel, tokens: Sequence[str]) -> np.ndarray | None:
    """Aspect distribution for one sentence, or None when no token is in vocabulary."""
    ids = model.encode_ids(tokens)
    if not ids:
        return None
    _, z = attention_encode(model.E[ids], model.M)
    return reconstruct(z, model.W, model.b, model.T)[0]


def assign_aspects(model: AspectModel, corpus: Sequence[Sequence[str]]) -> list[int | None]:
    out = []
    for toks in corpus:
        p = aspect_probs(model, toks)
        out.append(None if p is None else int(np.argmax(p)))
    return out


def top_terms(model: AspectModel, k: int, n: int = 10) -> list[tuple[str, float]]:
    """The ``n`` vocabulary words most cosine-similar to aspect ``k``; ties by word."""
    V = len(model.vocab)
    if n > V:
        raise AspectError(f"asked for {n} terms from a {V}-word vocabulary")
    t = model.T[k]
    norms = np.linalg.norm(model.E, axis=1) * np.linalg.norm(t)
    cos = np.where(norms > 0, (model.E @ t) / np.where(norms > 0, norms, 1.0), 0.0)
    order = sorted(range(V), key=lambda i: (-cos[i], model.vocab[i]))[:n]
    return [(model.vocab[i], float(cos[i])) for i in order]


def purity(assignments: Sequence[int | None], topics: Sequence[object]) -> float:
    """Fraction of sentences whose aspect's majority topic equals their own topic."""
    by_aspect: dict[int, dict[object, int]] = {}
    n = 0
    for a, t in zip(assignments, topics):
        if a is None:
            continue
        n += 1
        counts = by_aspect.setdefault(a, {})
        counts[t] = counts.get(t, 0) + 1
    if n == 0:
        return 0.0
    return sum(max(c.values()) for c in by_aspect.values()) / n


def load_subcategory_map(path: str | Path) -> dict[str, list[str]]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise AspectError(f"{path}: expected an object of term -> [subcategory, ...]")
    out = {}
    for term, subs in raw.items():
        if isinstance(subs, str):
            subs = [subs]
        if not subs or not all(isinstance(s, str) and s for s in subs):
            raise AspectError(f"{path}: term {term!r} must map to at least one subcategory")
        out[term.lower()] = list(dict.fromkeys(subs))
    return out


def aspect_subcategories(model: AspectModel, submap: Mapping[str, Sequence[str]], top_n: int = 10) -> list[list[str]]:
    """Subcategories hit by each aspect's top terms; unmapped aspects get ``other``."""
    out = []
    n = min(top_n, len(model.vocab))
    for k in range(model.K):
        subs: list[str] = []
        for term, _ in top_terms(model, k, n):
            for s in submap.get(term, ()):
                if s not in subs:
                    subs.append(s)
        out.append(sorted(subs) if subs else [OTHER])
    return out


def assign_subcategories(
    model: AspectModel,
    submap: Mapping[str, Sequence[str]],
    corpus: Sequence[Sequence[str]],
    timestamps: Sequence[datetime],
    windows: Sequence[tuple[datetime, datetime]],
    top_n: int = 10,
) -> list[dict[str, int]]:
    """Per-window subcategory counts: each sentence adds one to every subcategory of its argmax aspect."""
    subs = aspect_subcategories(model, submap, top_n)
    counts: list[dict[str, int]] = [{} for _ in windows]
    starts = [w[0] for w in windows]
    for toks, ts in zip(corpus, timestamps):
        k = assign_aspects(model, [toks])[0]
        if k is None:
            continue
        w = _window_of(ts, windows, starts)
        if w is None:
            continue
        for s in subs[k]:
            counts[w][s] = counts[w].get(s, 0) + 1
    return counts


def _window_of(ts, windows, starts):
    i = bisect.bisect_right(starts, ts) - 1
    if i < 0 or ts >= windows[i][1]:
        return None
    return i
