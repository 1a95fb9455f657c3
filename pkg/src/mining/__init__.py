"""Hard adversarial example mining and the dropping baselines."""

from typing import Optional

import torch

from src.attack.config import AttackConfig
from src.core.models import Classifier
from src.mining.baselines import (
    confidence_drop_batch,
    confidence_drop_mask,
    random_drop_batch,
    random_drop_mask,
)
from src.mining.config import MiningConfig, MiningMode
from src.mining.ham import (
    HardnessAssessment,
    MinedBatch,
    assess_at_m,
    build_hard_batch,
    hardness_weight,
    weighted_loss,
)


def mine_batch(
    model: Classifier,
    images: torch.Tensor,
    labels: torch.Tensor,
    attack: AttackConfig,
    mining: MiningConfig,
    attack_generator: Optional[torch.Generator] = None,
    mask_generator: Optional[torch.Generator] = None,
) -> MinedBatch:
    """Dispatch to the selection scheme named by ``mining.mode``."""
    if mining.mode == "random_drop":
        return random_drop_batch(
            model, images, labels, attack, mining, attack_generator, mask_generator
        )
    if mining.mode == "confidence_drop":
        return confidence_drop_batch(
            model, images, labels, attack, mining, attack_generator
        )
    return build_hard_batch(model, images, labels, attack, mining, attack_generator)


__all__ = [
    "HardnessAssessment",
    "MinedBatch",
    "MiningConfig",
    "MiningMode",
    "assess_at_m",
    "build_hard_batch",
    "confidence_drop_batch",
    "confidence_drop_mask",
    "hardness_weight",
    "mine_batch",
    "random_drop_batch",
    "random_drop_mask",
    "weighted_loss",
]
