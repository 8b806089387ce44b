from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .losses import batch_bce, bce_loss, head_to_prob, model_loss
from .networks import (
    HEAD_THRESHOLD,
    KERNEL_WIDTHS,
    MODEL_KINDS,
    SIGMOID_THRESHOLD,
    EmotionModel,
    ModelSpec,
    ShapeError,
    forward_cnn,
    forward_head,
    forward_lstm,
    init_params,
    param_shapes,
    threshold_scores,
    zero_params,
)
from .optim import AdamWConfig, AdamWState, adamw_step
from .training import TrainConfig, TrainingSet, TrainResult, batch_loss_and_grads, dataset_loss, train

__all__ = [
    "AdamWConfig", "AdamWState", "Checkpoint", "CheckpointError", "EmotionModel",
    "HEAD_THRESHOLD", "KERNEL_WIDTHS", "MODEL_KINDS", "ModelSpec", "SIGMOID_THRESHOLD",
    "ShapeError", "TrainConfig", "TrainResult", "TrainingSet", "adamw_step",
    "batch_bce", "batch_loss_and_grads", "bce_loss", "dataset_loss", "forward_cnn",
    "forward_head", "forward_lstm", "head_to_prob", "init_params", "load_checkpoint",
    "model_loss", "param_shapes", "save_checkpoint", "threshold_scores", "train",
    "zero_params",
]
