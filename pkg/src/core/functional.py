"""Loss and input gradients."""

from typing import Tuple

import torch
import torch.nn.functional as F

from src.common.errors import (
    LabelOutOfRangeError,
    NonDifferentiableError,
    NonFiniteLogitsError,
)
from src.core.models import Classifier, forward


def cross_entropy(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Per-example cross-entropy, -log softmax(logits)[label].

    Args:
        logits (torch.Tensor): (N, num_classes) finite scores
        labels (torch.Tensor): (N,) class indices
    Returns:
        torch.Tensor of shape (N,)
    Raises:
        LabelOutOfRangeError if a label is outside [0, num_classes)
        NonFiniteLogitsError if the logits are not finite
    """
    num_classes = logits.shape[1]
    if labels.numel() and (int(labels.min()) < 0 or int(labels.max()) >= num_classes):
        raise LabelOutOfRangeError(
            f"labels must lie in [0, {num_classes}) not "
            f"[{int(labels.min())}, {int(labels.max())}]"
        )
    if not bool(torch.isfinite(logits).all()):
        raise NonFiniteLogitsError("logits must be finite")
    return F.cross_entropy(logits, labels, reduction="none")


def true_class_confidence(logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """Softmax probability of the true class."""
    probs = torch.softmax(logits, dim=1)
    return probs.gather(1, labels.unsqueeze(1)).squeeze(1)


def loss_and_input_gradient(
    model: Classifier, images: torch.Tensor, labels: torch.Tensor
) -> Tuple[torch.Tensor, torch.Tensor]:
    """Eval-mode logits and the gradient of each example's loss w.r.t. its image.

    Examples do not interact in eval mode, so the gradient of the summed loss
    is the per-example gradient.

    Returns:
        (logits detached, gradient with the shape of ``images``)
    Raises:
        NonDifferentiableError if the loss has no gradient path to the images
    """
    x = images.detach().clone().requires_grad_(True)
    with torch.enable_grad():
        logits = forward(model, x, "eval")
        loss = cross_entropy(logits, labels).sum()
        if not loss.requires_grad:
            raise NonDifferentiableError("loss does not depend on the input images")
        (grad,) = torch.autograd.grad(loss, x, allow_unused=True)
    if grad is None:
        raise NonDifferentiableError("loss does not depend on the input images")
    return logits.detach(), grad.detach()


def input_gradient(
    model: Classifier, images: torch.Tensor, labels: torch.Tensor
) -> torch.Tensor:
    """Gradient of cross_entropy(forward(model, images), labels) w.r.t. images."""
    _, grad = loss_and_input_gradient(model, images, labels)
    return grad
