"""Easy/hard partition at step M and sigmoid reweighting of hard examples."""

from dataclasses import dataclass
from typing import Optional, Union

import torch

from src.attack.config import AttackConfig
from src.attack.pgd import AttackTrajectory, resume_pgd, run_pgd
from src.common.logger import get_logger
from src.core.functional import cross_entropy
from src.core.models import Classifier, predict
from src.mining.config import MiningConfig

logger = get_logger(__name__)


@dataclass
class HardnessAssessment:
    """Per-example verdict at step M; easy rows carry weight exactly 0."""

    is_hard: torch.Tensor
    weight: torch.Tensor
    max_logits_delta: torch.Tensor


@dataclass
class MinedBatch:
    """
    The adversarial examples a batch contributes to the update.

    Attributes:
        kept_index: (k,) rows of the original batch that are kept
        adversarial: (k, C, H, W) finished adversarial examples of kept rows
        labels: (k,) labels of kept rows
        weights: (n,) loss weight of every row, 0 for dropped rows
        attack_steps: PGD iterations spent on the batch
        batch_size: n
        assessment: the easy/hard verdict when mining by hardness
    """

    kept_index: torch.Tensor
    adversarial: torch.Tensor
    labels: torch.Tensor
    weights: torch.Tensor
    attack_steps: int
    batch_size: int
    assessment: Optional[HardnessAssessment] = None

    @property
    def kept_count(self) -> int:
        return int(self.kept_index.numel())

    @property
    def dropped_count(self) -> int:
        return self.batch_size - self.kept_count

    @property
    def kept_weights(self) -> torch.Tensor:
        return self.weights[self.kept_index]


def assess_at_m(
    trajectory: AttackTrajectory,
    labels: torch.Tensor,
    early_drop_step: Optional[int] = None,
) -> torch.Tensor:
    """
    Hard iff the prediction at the step-M iterate differs from the label.

    Args:
        trajectory (AttackTrajectory): run truncated at M
        labels (torch.Tensor): (N,) true classes
        early_drop_step (Optional[int]): M, checked against the trajectory
    Returns:
        (N,) boolean mask of hard examples
    """
    if early_drop_step is not None and trajectory.steps_executed != early_drop_step:
        raise ValueError(
            f"trajectory ran {trajectory.steps_executed} steps, "
            f"expected {early_drop_step}"
        )
    return predict(trajectory.last_logits) != labels


def hardness_weight(
    max_logits_delta: Union[torch.Tensor, float], lambda_shift: float
) -> torch.Tensor:
    """sigmoid(z + lambda), strictly increasing in z with range (0, 1)."""
    z = torch.as_tensor(max_logits_delta)
    if not bool(torch.isfinite(z).all()):
        raise ValueError("max_logits_delta must be finite")
    return torch.sigmoid(z + lambda_shift)


def build_hard_batch(
    model: Classifier,
    images: torch.Tensor,
    labels: torch.Tensor,
    attack: AttackConfig,
    mining: MiningConfig,
    generator: Optional[torch.Generator] = None,
) -> MinedBatch:
    """
    Attack every example for M steps, drop the easy ones and finish the hard ones.

    Hard examples are resumed to K steps and weighted by ``hardness_weight``
    over the max logits change of their full trajectory. With mode "none"
    every example is attacked for K steps and weighted 1.

    Returns:
        MinedBatch whose ``attack_steps`` is n*M + |hard|*(K - M)
    """
    n = images.shape[0]
    if mining.mode == "none":
        trajectory = run_pgd(model, images, labels, attack, generator=generator)
        return MinedBatch(
            kept_index=torch.arange(n, device=images.device),
            adversarial=trajectory.final_adversarial,
            labels=labels,
            weights=torch.ones(n, dtype=images.dtype, device=images.device),
            attack_steps=trajectory.attack_steps,
            batch_size=n,
        )
    if mining.mode != "ham":
        raise ValueError(f"build_hard_batch mines by hardness, not {mining.mode}")
    if mining.early_drop_step > attack.steps:
        raise ValueError(
            f"early_drop_step {mining.early_drop_step} exceeds attack steps "
            f"{attack.steps}"
        )

    truncated = run_pgd(
        model,
        images,
        labels,
        attack,
        stop_at=mining.early_drop_step,
        generator=generator,
    )
    hard = assess_at_m(truncated, labels, mining.early_drop_step)
    if mining.force_all_hard:
        hard = torch.ones_like(hard)
    hard_index = hard.nonzero(as_tuple=True)[0]
    weights = torch.zeros(n, dtype=images.dtype, device=images.device)
    max_delta = truncated.max_logits_delta.clone()
    attack_steps = truncated.attack_steps

    if hard_index.numel() == 0:
        logger.debug(f"no hard examples among {n} at step {mining.early_drop_step}")
        adversarial = images[hard_index]
    else:
        finished = resume_pgd(
            model,
            truncated.select(hard_index),
            images[hard_index],
            labels[hard_index],
            attack,
        )
        attack_steps += len(finished) * (attack.steps - mining.early_drop_step)
        max_delta[hard_index] = finished.max_logits_delta
        weights[hard_index] = hardness_weight(
            finished.max_logits_delta, mining.lambda_shift
        ).to(weights.dtype)
        adversarial = finished.final_adversarial

    return MinedBatch(
        kept_index=hard_index,
        adversarial=adversarial,
        labels=labels[hard_index],
        weights=weights,
        attack_steps=attack_steps,
        batch_size=n,
        assessment=HardnessAssessment(
            is_hard=hard, weight=weights, max_logits_delta=max_delta
        ),
    )


def weighted_loss(
    logits: torch.Tensor,
    labels: torch.Tensor,
    weights: torch.Tensor,
    batch_size: int,
    normalization: str = "batch",
) -> torch.Tensor:
    """
    Sum of weight * cross-entropy over kept examples, normalized.

    "batch" divides by the full batch size so dropped examples shrink the
    gradient; "kept" divides by the number of examples with a nonzero weight,
    so a zero-weighted example and a removed one give the same loss.
    """
    total = (weights * cross_entropy(logits, labels)).sum()
    kept = max(int((weights > 0).sum()), 1)
    denominator = batch_size if normalization == "batch" else kept
    return total / denominator
