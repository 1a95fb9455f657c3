"""Differentiable classifiers, loss, optimizer step and checkpoints."""

from src.core.checkpoint import (
    Checkpoint,
    load_checkpoint,
    restore_training_state,
    save_checkpoint,
)
from src.core.functional import (
    cross_entropy,
    input_gradient,
    loss_and_input_gradient,
    true_class_confidence,
)
from src.core.models import (
    Classifier,
    build_classifier,
    forward,
    parameter_count,
    predict,
)
from src.core.optim import make_optimizer, set_learning_rate, sgd_update
from src.core.types import ArchitectureSpec, LabeledExample, Mode

__all__ = [
    "ArchitectureSpec",
    "Checkpoint",
    "Classifier",
    "LabeledExample",
    "Mode",
    "build_classifier",
    "cross_entropy",
    "forward",
    "input_gradient",
    "load_checkpoint",
    "loss_and_input_gradient",
    "make_optimizer",
    "parameter_count",
    "predict",
    "restore_training_state",
    "save_checkpoint",
    "set_learning_rate",
    "sgd_update",
    "true_class_confidence",
]
