"""Robust fairness metrics and confidence diagnostics."""

from src.metrics.diagnostics import (
    OverconfidenceReport,
    StepHistogram,
    overconfidence_report,
    step_histogram,
)
from src.metrics.fairness import (
    ERROR_KINDS,
    FairnessReport,
    class_error_counts,
    fairness_report,
)
from src.metrics.outcomes import PerExampleOutcome, collect_outcomes, outcomes_frame

__all__ = [
    "ERROR_KINDS",
    "FairnessReport",
    "OverconfidenceReport",
    "PerExampleOutcome",
    "StepHistogram",
    "class_error_counts",
    "collect_outcomes",
    "fairness_report",
    "outcomes_frame",
    "overconfidence_report",
    "step_histogram",
]
