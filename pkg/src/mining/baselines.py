"""Dropping baselines used by the ablations: random drop and confidence drop."""

import math
from typing import Optional

import torch

from src.attack.config import AttackConfig
from src.attack.pgd import run_pgd
from src.core.functional import true_class_confidence
from src.core.models import Classifier, forward
from src.mining.config import MiningConfig
from src.mining.ham import MinedBatch


def _drop_count(drop_rate: float, n: int) -> int:
    # guard against products such as 0.29 * 100 = 28.999999999999996
    return int(math.floor(drop_rate * n + 1e-9))


def random_drop_mask(
    batch_size: int, drop_rate: float, generator: Optional[torch.Generator] = None
) -> torch.Tensor:
    """Drop each example independently with probability ``drop_rate``.

    Returns:
        (batch_size,) boolean mask, True for dropped examples
    """
    if not 0 <= drop_rate < 1:
        raise ValueError(f"drop_rate must lie in [0, 1) not {drop_rate}")
    return torch.rand(batch_size, generator=generator) < drop_rate


def confidence_gap(
    model: Classifier,
    labels: torch.Tensor,
    clean: torch.Tensor,
    adversarial: torch.Tensor,
) -> torch.Tensor:
    """Adversarial minus clean true-class confidence, from eval-mode forwards."""
    with torch.no_grad():
        clean_conf = true_class_confidence(forward(model, clean, "eval"), labels)
        adv_conf = true_class_confidence(forward(model, adversarial, "eval"), labels)
    return adv_conf - clean_conf


def confidence_drop_mask(
    model: Classifier,
    labels: torch.Tensor,
    clean: torch.Tensor,
    adversarial: torch.Tensor,
    drop_rate: float,
) -> torch.Tensor:
    """
    Drop the ``floor(drop_rate * n)`` most over-confident adversarial examples.

    Examples are ranked by adversarial minus clean true-class confidence,
    largest first; ties keep input order.

    Returns:
        (n,) boolean mask, True for dropped examples
    """
    if not 0 <= drop_rate < 1:
        raise ValueError(f"drop_rate must lie in [0, 1) not {drop_rate}")
    n = labels.shape[0]
    mask = torch.zeros(n, dtype=torch.bool, device=labels.device)
    count = _drop_count(drop_rate, n)
    if count == 0:
        return mask
    gap = confidence_gap(model, labels, clean, adversarial)
    order = torch.sort(gap, descending=True, stable=True).indices
    mask[order[:count]] = True
    return mask


def _kept_batch(
    keep: torch.Tensor,
    adversarial: torch.Tensor,
    labels: torch.Tensor,
    attack_steps: int,
    dtype: torch.dtype,
) -> MinedBatch:
    n = keep.shape[0]
    kept_index = keep.nonzero(as_tuple=True)[0]
    return MinedBatch(
        kept_index=kept_index,
        adversarial=adversarial,
        labels=labels[kept_index],
        weights=keep.to(dtype),
        attack_steps=attack_steps,
        batch_size=n,
    )


def random_drop_batch(
    model: Classifier,
    images: torch.Tensor,
    labels: torch.Tensor,
    attack: AttackConfig,
    mining: MiningConfig,
    attack_generator: Optional[torch.Generator] = None,
    mask_generator: Optional[torch.Generator] = None,
) -> MinedBatch:
    """Attack only the examples that survive a random drop, for K steps each."""
    dropped = random_drop_mask(images.shape[0], mining.drop_rate, mask_generator)
    keep = ~dropped.to(images.device)
    kept_index = keep.nonzero(as_tuple=True)[0]
    if kept_index.numel() == 0:
        return _kept_batch(keep, images[kept_index], labels, 0, images.dtype)
    trajectory = run_pgd(
        model,
        images[kept_index],
        labels[kept_index],
        attack,
        generator=attack_generator,
    )
    return _kept_batch(
        keep,
        trajectory.final_adversarial,
        labels,
        trajectory.attack_steps,
        images.dtype,
    )


def confidence_drop_batch(
    model: Classifier,
    images: torch.Tensor,
    labels: torch.Tensor,
    attack: AttackConfig,
    mining: MiningConfig,
    attack_generator: Optional[torch.Generator] = None,
) -> MinedBatch:
    """Attack every example for K steps, then drop the most over-confident ones."""
    trajectory = run_pgd(model, images, labels, attack, generator=attack_generator)
    dropped = confidence_drop_mask(
        model, labels, images, trajectory.final_adversarial, mining.drop_rate
    )
    keep = ~dropped
    return _kept_batch(
        keep,
        trajectory.final_adversarial[keep],
        labels,
        trajectory.attack_steps,
        images.dtype,
    )
