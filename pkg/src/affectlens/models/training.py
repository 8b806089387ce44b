"""Seeded mini-batch AdamW training for the EC models."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .checkpoint import Checkpoint
from .losses import model_loss
from .networks import EmotionModel, ModelSpec, init_params
from .optim import AdamWConfig, AdamWState, adamw_step

log = logging.getLogger(__name__)

DEFAULT_LR = {"head": 2e-5, "cnn": 1e-3, "lstm": 1e-3}


@dataclass
class TrainConfig:
    epochs: int = 5
    lr: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if self.lr is not None and self.lr <= 0:
            raise ValueError("lr must be positive")

    def optimizer(self, kind: str) -> AdamWConfig:
        lr = self.lr if self.lr is not None else DEFAULT_LR[kind]
        return AdamWConfig(lr, self.beta1, self.beta2, self.eps, self.weight_decay)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrainingSet:
    """Model inputs aligned with lexicon features and gold bits.

    ``inputs``: (N, E) sentence vectors for the head, or a list of (n_i, d)
    token matrices for the CNN/LSTM.
    """

    inputs: np.ndarray | Sequence[np.ndarray]
    lex: np.ndarray
    labels: np.ndarray
    ids: list[str] | None = None

    def __post_init__(self):
        self.lex = np.atleast_2d(np.asarray(self.lex, dtype=np.float64))
        self.labels = np.atleast_2d(np.asarray(self.labels, dtype=bool))
        n = len(self.inputs)
        if n == 0:
            raise ValueError("empty training set")
        if self.lex.shape[0] != n or self.labels.shape[0] != n:
            raise ValueError(
                f"feature/label length mismatch: {n} inputs, "
                f"{self.lex.shape[0]} feature rows, {self.labels.shape[0]} label rows"
            )

    def __len__(self) -> int:
        return len(self.inputs)

    def batch(self, idx):
        if isinstance(self.inputs, np.ndarray):
            inputs = self.inputs[idx]
        else:
            inputs = [self.inputs[i] for i in idx]
        return inputs, self.lex[idx], self.labels[idx]


@dataclass
class TrainResult:
    model: EmotionModel
    checkpoint: Checkpoint
    history: dict = field(default_factory=dict)


def batch_loss_and_grads(model: EmotionModel, inputs, lex, labels):
    scores, cache = model.forward(inputs, lex)
    loss, dscores = model_loss(model.kind, scores, labels)
    return loss, model.backward(cache, dscores)


def dataset_loss(model: EmotionModel, data: TrainingSet) -> float:
    scores = model.scores(data.inputs, data.lex)
    return model_loss(model.kind, scores, data.labels)[0]


def train(
    spec: ModelSpec,
    data: TrainingSet,
    config: TrainConfig,
    taxonomy: dict | None = None,
    track_batches: bool = False,
) -> TrainResult:
    """Initialize from ``config.seed`` and run ``epochs`` shuffled passes of AdamW.

    Initialization and shuffling draw from one generator in a fixed order, so
    the same seed gives bit-identical parameters.
    """
    if data.lex.shape[1] != spec.lex_dim or data.labels.shape[1] != spec.n_labels:
        raise ValueError(
            f"data has {data.lex.shape[1]} lexicon / {data.labels.shape[1]} label columns, "
            f"model expects {spec.lex_dim} / {spec.n_labels}"
        )
    rng = np.random.default_rng(config.seed)
    model = EmotionModel(spec, init_params(spec, rng))
    opt_cfg = config.optimizer(spec.kind)
    state = AdamWState.zeros_like(model.params)
    history: dict[str, list[float]] = {"epoch_loss": []}
    if track_batches:
        history["batch_loss"] = []
    n = len(data)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = batch_loss_and_grads(model, *data.batch(idx))
            params, state = adamw_step(model.params, grads, state, opt_cfg)
            model.params = params
            total += loss * len(idx)
            if track_batches:
                history["batch_loss"].append(loss)
        history["epoch_loss"].append(total / n)
        log.info("epoch %d/%d loss %.6f", epoch + 1, config.epochs, total / n)
    ckpt = Checkpoint(
        spec=spec,
        params=model.params,
        optimizer=state,
        taxonomy=taxonomy or {},
        config=config.to_dict(),
        seed=config.seed,
        history={"epoch_loss": history["epoch_loss"]},
    )
    return TrainResult(model, ckpt, history)
