"""Over-confidence and minimal-step diagnostics."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from src.attack.pgd import NEVER
from src.metrics.outcomes import PerExampleOutcome

ScatterPoint = Tuple[float, float, int, bool]


@dataclass(frozen=True)
class OverconfidenceReport:
    """
    Attributes:
        proportions: per class, fraction whose adversarial confidence is
            strictly greater than the clean confidence (0 for empty classes)
        scatter: (clean confidence, adversarial confidence, class, over-confident)
    """

    proportions: List[float]
    scatter: List[ScatterPoint] = field(default_factory=list)


def overconfidence_report(
    outcomes: Sequence[PerExampleOutcome], num_classes: int
) -> OverconfidenceReport:
    totals = [0] * num_classes
    over = [0] * num_classes
    scatter: List[ScatterPoint] = []
    for outcome in outcomes:
        flag = outcome.adversarial_confidence > outcome.clean_confidence
        totals[outcome.label] += 1
        over[outcome.label] += int(flag)
        scatter.append(
            (
                outcome.clean_confidence,
                outcome.adversarial_confidence,
                outcome.label,
                flag,
            )
        )
    proportions = [o / t if t else 0.0 for o, t in zip(over, totals)]
    return OverconfidenceReport(proportions=proportions, scatter=scatter)


@dataclass(frozen=True)
class StepHistogram:
    """
    Number of examples by the first PGD step that crossed the boundary.

    Attributes:
        steps: K, the attack length the outcomes were collected with
        counts: examples per step 1..K
        never: examples the attack never crossed
    """

    steps: int
    counts: Dict[int, int]
    never: int

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.never

    def easy_fraction(self, early_drop_step: int) -> float:
        """Fraction still not crossed after ``early_drop_step`` steps."""
        if self.total == 0:
            return 0.0
        late = sum(c for step, c in self.counts.items() if step > early_drop_step)
        return (late + self.never) / self.total

    def early_drop_precision(self, early_drop_step: int) -> float:
        """Among examples easy at ``early_drop_step``, the fraction never crossed."""
        late = sum(c for step, c in self.counts.items() if step > early_drop_step)
        easy = late + self.never
        return self.never / easy if easy else 1.0

    def rows(self) -> List[Tuple[str, int]]:
        """(bucket, count) rows with the NEVER bucket last."""
        return [(str(step), self.counts[step]) for step in range(1, self.steps + 1)] + [
            ("never", self.never)
        ]


def step_histogram(outcomes: Sequence[PerExampleOutcome], steps: int) -> StepHistogram:
    """
    Partition outcomes by minimal successful attack step.

    Raises:
        ValueError if an outcome crossed after step ``steps``
    """
    counts = {step: 0 for step in range(1, steps + 1)}
    never = 0
    for outcome in outcomes:
        if outcome.minimal_step == NEVER:
            never += 1
        elif 1 <= outcome.minimal_step <= steps:
            counts[outcome.minimal_step] += 1
        else:
            raise ValueError(
                f"minimal step {outcome.minimal_step} outside [1, {steps}]"
            )
    return StepHistogram(steps=steps, counts=counts, never=never)
