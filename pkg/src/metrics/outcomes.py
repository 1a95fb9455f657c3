"""Per-example clean and adversarial outcomes under the evaluation attack."""

from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import pandas as pd
import torch

from src.attack.config import AttackConfig
from src.attack.pgd import NEVER, run_pgd
from src.core.functional import true_class_confidence
from src.core.models import Classifier, forward, predict
from src.data.batching import batches
from src.data.collection import ExampleSet


@dataclass(frozen=True)
class PerExampleOutcome:
    """
    Attributes:
        label: true class
        clean_prediction: greedy class on the clean image
        adversarial_prediction: greedy class on the final iterate
        clean_confidence: true-class probability on the clean image
        adversarial_confidence: true-class probability on the final iterate
        minimal_step: first step the attack crossed the boundary, or NEVER
    """

    label: int
    clean_prediction: int
    adversarial_prediction: int
    clean_confidence: float
    adversarial_confidence: float
    minimal_step: int = NEVER

    @property
    def clean_correct(self) -> bool:
        return self.clean_prediction == self.label

    @property
    def adversarial_correct(self) -> bool:
        return self.adversarial_prediction == self.label


def collect_outcomes(
    model: Classifier,
    dataset: ExampleSet,
    attack: AttackConfig,
    batch_size: int = 256,
    generator: Optional[torch.Generator] = None,
) -> List[PerExampleOutcome]:
    """
    Attack every example of ``dataset`` with ``attack`` against a frozen model.

    Confidences of clean and adversarial images come from the same no-grad
    eval-mode forward, so a zero budget gives identical values.

    Returns:
        one PerExampleOutcome per example, in dataset order
    """
    outcomes: List[PerExampleOutcome] = []
    for images, labels in batches(dataset, batch_size, seed=0, epoch=0, shuffle=False):
        trajectory = run_pgd(model, images, labels, attack, generator=generator)
        with torch.no_grad():
            clean_logits = forward(model, images, "eval")
            adv_logits = forward(model, trajectory.final_adversarial, "eval")
        clean_conf = true_class_confidence(clean_logits, labels)
        adv_conf = true_class_confidence(adv_logits, labels)
        rows = zip(
            labels.tolist(),
            predict(clean_logits).tolist(),
            predict(adv_logits).tolist(),
            clean_conf.tolist(),
            adv_conf.tolist(),
            trajectory.crossing_step.tolist(),
        )
        outcomes.extend(PerExampleOutcome(*row) for row in rows)
    return outcomes


def outcomes_frame(outcomes: Sequence[PerExampleOutcome]) -> pd.DataFrame:
    """One row per outcome, columns named after the dataclass fields."""
    columns = list(PerExampleOutcome.__dataclass_fields__)
    return pd.DataFrame([asdict(o) for o in outcomes], columns=columns)
