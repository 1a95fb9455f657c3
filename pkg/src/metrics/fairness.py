"""Class-wise standard, boundary and robust errors."""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from src.common.errors import EmptyClassError
from src.metrics.outcomes import PerExampleOutcome, outcomes_frame

ERROR_KINDS = ("standard", "boundary", "robust")


@dataclass(frozen=True)
class FairnessReport:
    """
    Per-class error fractions and their class-level aggregates.

    Robust error is stored as standard + boundary, so the sum identity holds
    exactly per class and for the averages. Averages are unweighted means
    over classes; worst values are maxima over classes.
    """

    standard: List[float]
    boundary: List[float]
    robust: List[float]
    avg_standard: float
    avg_boundary: float
    avg_robust: float
    worst_standard: float
    worst_boundary: float
    worst_robust: float
    robust_accuracy_std: float

    @classmethod
    def from_class_errors(
        cls, standard: Sequence[float], boundary: Sequence[float]
    ) -> "FairnessReport":
        """Build a report from per-class standard and boundary errors."""
        if len(standard) != len(boundary) or not standard:
            raise ValueError("need one standard and one boundary error per class")
        std = [float(s) for s in standard]
        bndy = [float(b) for b in boundary]
        rob = [s + b for s, b in zip(std, bndy)]
        avg_standard = float(np.mean(std))
        avg_boundary = float(np.mean(bndy))
        return cls(
            standard=std,
            boundary=bndy,
            robust=rob,
            avg_standard=avg_standard,
            avg_boundary=avg_boundary,
            avg_robust=avg_standard + avg_boundary,
            worst_standard=max(std),
            worst_boundary=max(bndy),
            worst_robust=max(rob),
            robust_accuracy_std=float(np.std([1.0 - r for r in rob])),
        )

    @property
    def num_classes(self) -> int:
        return len(self.robust)

    def summary(self) -> Dict[str, float]:
        """The six-column Avg/Worst x Std/Bndy/Rob row plus the std-dev."""
        return {
            "avg_standard": self.avg_standard,
            "worst_standard": self.worst_standard,
            "avg_boundary": self.avg_boundary,
            "worst_boundary": self.worst_boundary,
            "avg_robust": self.avg_robust,
            "worst_robust": self.worst_robust,
            "robust_accuracy_std": self.robust_accuracy_std,
        }

    def per_class_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "class": list(range(self.num_classes)),
                "standard": self.standard,
                "boundary": self.boundary,
                "robust": self.robust,
                "robust_accuracy": [1.0 - r for r in self.robust],
            }
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: Dict[str, Any]) -> "FairnessReport":
        return cls(**{k: record[k] for k in cls.__dataclass_fields__})


def class_error_counts(
    outcomes: Sequence[PerExampleOutcome], num_classes: int
) -> pd.DataFrame:
    """
    Per-class example, standard-failure and boundary-failure counts.

    Raises:
        EmptyClassError naming the first class without examples
    """
    frame = outcomes_frame(outcomes)
    frame["standard_wrong"] = frame["clean_prediction"] != frame["label"]
    frame["boundary_wrong"] = ~frame["standard_wrong"] & (
        frame["adversarial_prediction"] != frame["label"]
    )
    counts = (
        frame.groupby("label")
        .agg(
            n=("label", "size"),
            standard=("standard_wrong", "sum"),
            boundary=("boundary_wrong", "sum"),
        )
        .reindex(range(num_classes))
    )
    missing = counts.index[counts["n"].isna()].tolist()
    if missing:
        raise EmptyClassError(int(missing[0]))
    return counts.astype(int)


def fairness_report(
    outcomes: Sequence[PerExampleOutcome], num_classes: int
) -> FairnessReport:
    """
    Standard error: wrong clean prediction. Boundary error: clean correct but
    adversarially wrong. Robust error: their sum.

    Raises:
        EmptyClassError if a class has no outcomes
    """
    counts = class_error_counts(outcomes, num_classes)
    standard = (counts["standard"] / counts["n"]).tolist()
    boundary = (counts["boundary"] / counts["n"]).tolist()
    return FairnessReport.from_class_errors(standard, boundary)
