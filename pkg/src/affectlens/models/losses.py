"""Multi-label binary cross-entropy."""

from __future__ import annotations

import numpy as np

P_MIN = 1e-12
P_MAX = 1.0 - 1e-12


def head_to_prob(act):
    """Map tanh activations in (-1, 1) to probabilities in (0, 1)."""
    return (np.asarray(act) + 1.0) / 2.0


def bce_loss(scores, gold) -> float:
    """Mean over labels of -[y ln p + (1 - y) ln(1 - p)], p clamped to [1e-12, 1 - 1e-12]."""
    p = np.asarray(scores, dtype=np.float64)
    y = np.asarray(gold, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError(f"score/label length mismatch: {p.shape} vs {y.shape}")
    p = np.clip(p, P_MIN, P_MAX)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def batch_bce(probs, gold) -> tuple[float, np.ndarray]:
    """Batch-mean BCE over a (B, L) probability matrix and its gradient w.r.t. ``probs``.

    Clamped entries get zero gradient, matching the clamp in the forward value.
    """
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(gold, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError(f"score/label shape mismatch: {p.shape} vs {y.shape}")
    B, L = p.shape
    pc = np.clip(p, P_MIN, P_MAX)
    loss = float(np.mean(-(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc))))
    inside = (p >= P_MIN) & (p <= P_MAX)
    grad = np.where(inside, (pc - y) / (pc * (1.0 - pc)), 0.0) / (B * L)
    return loss, grad


def model_loss(kind: str, scores, gold) -> tuple[float, np.ndarray]:
    """Loss and d(loss)/d(scores) for a model's raw outputs (tanh for the head, sigmoid otherwise)."""
    if kind == "head":
        loss, dp = batch_bce(head_to_prob(scores), gold)
        return loss, dp * 0.5
    return batch_bce(scores, gold)
