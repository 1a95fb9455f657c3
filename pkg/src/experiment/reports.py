"""Tables and plot-data series written into run directories."""

from pathlib import Path
from typing import Any, Dict, List, Sequence

import pandas as pd

from src.experiment.run_dir import RunDirectory
from src.metrics.diagnostics import OverconfidenceReport, StepHistogram
from src.metrics.fairness import FairnessReport

SUMMARY_COLUMNS = [
    "avg_standard",
    "worst_standard",
    "avg_boundary",
    "worst_boundary",
    "avg_robust",
    "worst_robust",
    "robust_accuracy_std",
]


def write_fairness(run: RunDirectory, report: FairnessReport) -> None:
    """Six-column summary plus std-dev, and the per-class rows."""
    run.write_table("fairness_summary", pd.DataFrame([report.summary()]))
    per_class = report.per_class_frame()
    run.write_table("fairness_per_class", per_class)
    run.write_plot_data("per_class_errors", per_class)


def write_diagnostics(
    run: RunDirectory,
    overconfidence: OverconfidenceReport,
    report: FairnessReport,
    histogram: StepHistogram,
    early_drop_step: int,
) -> None:
    """Scatter pairs, per-class over-confidence next to robust accuracy, histogram."""
    scatter = pd.DataFrame(
        overconfidence.scatter,
        columns=[
            "clean_confidence",
            "adversarial_confidence",
            "label",
            "over_confident",
        ],
    )
    run.write_plot_data("confidence_scatter", scatter)
    per_class = pd.DataFrame(
        {
            "class": list(range(report.num_classes)),
            "over_confident_proportion": overconfidence.proportions,
            "robust_accuracy": [1.0 - r for r in report.robust],
        }
    )
    run.write_table("overconfidence", per_class)
    run.write_plot_data("overconfidence", per_class)
    run.write_plot_data(
        "step_histogram", pd.DataFrame(histogram.rows(), columns=["step", "count"])
    )
    run.write_table(
        "step_summary",
        pd.DataFrame(
            [
                {
                    "steps": histogram.steps,
                    "early_drop_step": early_drop_step,
                    "total": histogram.total,
                    "never": histogram.never,
                    "easy_fraction": histogram.easy_fraction(early_drop_step),
                    "early_drop_precision": histogram.early_drop_precision(
                        early_drop_step
                    ),
                }
            ]
        ),
    )


def run_summary(run: RunDirectory) -> Dict[str, Any]:
    """Last evaluation of a run plus its summed attack steps and wall time."""
    epochs = run.records("epoch")
    evaluations = run.records("evaluation")
    row: Dict[str, Any] = {"run": run.root.name}
    if epochs:
        row["mode"] = epochs[-1]["mode"]
    row["attack_steps"] = sum(r["attack_steps"] for r in epochs)
    row["wall_seconds"] = sum(r["wall_seconds"] for r in epochs)
    if evaluations:
        last = FairnessReport.from_dict(evaluations[-1])
        row.update(last.summary())
    else:
        row.update({column: float("nan") for column in SUMMARY_COLUMNS})
    return row


def comparison_table(runs: Sequence[RunDirectory]) -> pd.DataFrame:
    """
    One row per run with attack steps and wall time relative to the first run.
    """
    rows: List[Dict[str, Any]] = [run_summary(run) for run in runs]
    frame = pd.DataFrame(rows)
    if frame.empty:
        return frame
    reference = frame.iloc[0]
    for column in ("attack_steps", "wall_seconds"):
        base = reference[column]
        frame[f"{column}_relative"] = frame[column] / base if base else float("nan")
    return frame


def expand_run_dirs(paths: Sequence[Path]) -> List[RunDirectory]:
    """Run directories in argument order; a sweep directory expands to its children."""
    runs = []
    for path in paths:
        path = Path(path)
        if (path / "config.yaml").exists():
            runs.append(RunDirectory(path))
            continue
        runs.extend(
            RunDirectory(child)
            for child in sorted(path.iterdir())
            if (child / "config.yaml").exists()
        )
    return runs
