"""Momentum SGD with classical weight decay."""

from typing import Optional, Sequence

import torch

from src.common.errors import NonFiniteGradientError, ShapeMismatchError
from src.core.models import Classifier


def make_optimizer(
    model: Classifier, learning_rate: float, momentum: float, weight_decay: float
) -> torch.optim.SGD:
    """SGD whose weight decay is added to the gradient before the momentum update."""
    if learning_rate < 0:
        raise ValueError(f"learning_rate must be nonnegative not {learning_rate}")
    if not 0 <= momentum < 1:
        raise ValueError(f"momentum must lie in [0, 1) not {momentum}")
    if weight_decay < 0:
        raise ValueError(f"weight_decay must be nonnegative not {weight_decay}")
    return torch.optim.SGD(
        model.parameters(),
        lr=learning_rate,
        momentum=momentum,
        weight_decay=weight_decay,
    )


def set_learning_rate(optimizer: torch.optim.Optimizer, learning_rate: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = learning_rate


def sgd_update(
    model: Classifier,
    optimizer: torch.optim.SGD,
    gradients: Optional[Sequence[torch.Tensor]] = None,
) -> None:
    """Apply one momentum-SGD step.

    Args:
        model (Classifier): the model whose parameters the optimizer owns
        optimizer (torch.optim.SGD): holds learning rate and momentum buffers
        gradients: optional explicit gradients, one per parameter in order;
            when omitted the ``.grad`` fields from a backward pass are used
    Raises:
        ShapeMismatchError if an explicit gradient does not match its parameter
        NonFiniteGradientError if any gradient holds NaN or Inf
    """
    params = list(model.parameters())
    if gradients is not None:
        if len(gradients) != len(params):
            raise ShapeMismatchError(
                f"expected {len(params)} gradients not {len(gradients)}"
            )
        for param, grad in zip(params, gradients):
            if grad.shape != param.shape:
                raise ShapeMismatchError(
                    f"gradient shape {tuple(grad.shape)} does not match "
                    f"parameter shape {tuple(param.shape)}"
                )
            param.grad = grad.detach().to(dtype=param.dtype).clone()
    for index, param in enumerate(params):
        if param.grad is not None and not bool(torch.isfinite(param.grad).all()):
            raise NonFiniteGradientError(f"non-finite gradient in parameter {index}")
    optimizer.step()
