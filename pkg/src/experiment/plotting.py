"""Figures rendered from plot-data series."""

from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from src.common.errors import MissingPlotDataError  # noqa: E402
from src.common.logger import get_logger  # noqa: E402
from src.experiment.run_dir import RunDirectory  # noqa: E402

logger = get_logger(__name__)


def _save(fig: plt.Figure, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return path


def confidence_scatter(frame: pd.DataFrame, path: Path) -> Path:
    """Clean vs adversarial true-class confidence with the y = x reference line."""
    fig, ax = plt.subplots(figsize=(6, 6))
    over = frame["over_confident"].astype(bool)
    ax.scatter(
        frame.loc[~over, "clean_confidence"],
        frame.loc[~over, "adversarial_confidence"],
        s=6,
        alpha=0.5,
        label="adversarial < clean",
    )
    ax.scatter(
        frame.loc[over, "clean_confidence"],
        frame.loc[over, "adversarial_confidence"],
        s=6,
        alpha=0.5,
        color="tab:red",
        label="over-confident",
    )
    ax.plot([0, 1], [0, 1], "k--", linewidth=1)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xlabel("clean confidence")
    ax.set_ylabel("adversarial confidence")
    ax.legend(loc="upper left")
    return _save(fig, path)


def per_class_errors(frame: pd.DataFrame, path: Path) -> Path:
    """Stacked standard and boundary error per class; the stack is robust error."""
    fig, ax = plt.subplots(figsize=(8, 4))
    classes = frame["class"].astype(str)
    ax.bar(classes, frame["standard"], label="standard")
    ax.bar(classes, frame["boundary"], bottom=frame["standard"], label="boundary")
    ax.set_xlabel("class")
    ax.set_ylabel("error")
    ax.set_ylim(0, 1)
    ax.legend()
    return _save(fig, path)


def step_histogram(frame: pd.DataFrame, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(frame["step"].astype(str), frame["count"])
    ax.set_xlabel("minimal successful attack step")
    ax.set_ylabel("examples")
    return _save(fig, path)


def overconfidence(frame: pd.DataFrame, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4))
    classes = frame["class"].astype(str)
    ax.bar(classes, frame["over_confident_proportion"], label="over-confident")
    ax.plot(classes, frame["robust_accuracy"], "ko-", label="robust accuracy")
    ax.set_ylim(0, 1)
    ax.set_xlabel("class")
    ax.legend()
    return _save(fig, path)


def sweep(frame: pd.DataFrame, path: Path) -> Path:
    """Worst-class robust error against the swept value, averaged over seeds."""
    fig, ax = plt.subplots(figsize=(6, 4))
    grouped = frame.groupby("value", sort=False)["worst_robust"].mean()
    ax.plot(grouped.index.astype(str), grouped.values, "o-")
    ax.set_xlabel(str(frame["parameter"].iloc[0]) if len(frame) else "value")
    ax.set_ylabel("worst-class robust error")
    return _save(fig, path)


RENDERERS: Dict[str, Callable[[pd.DataFrame, Path], Path]] = {
    "confidence_scatter": confidence_scatter,
    "per_class_errors": per_class_errors,
    "step_histogram": step_histogram,
    "overconfidence": overconfidence,
    "sweep": sweep,
}


def render(run: RunDirectory, series: Optional[Sequence[str]] = None) -> List[Path]:
    """
    Render figures for the requested series, or for every series present.

    Raises:
        MissingPlotDataError naming a requested series without data, or when
        the directory holds no plot data at all
    """
    if series:
        unknown = [name for name in series if name not in RENDERERS]
        if unknown:
            raise ValueError(f"unknown plot series: {', '.join(unknown)}")
        for name in series:
            if not run.has_plot_data(name):
                raise MissingPlotDataError(name)
        names = list(series)
    else:
        names = [name for name in RENDERERS if run.has_plot_data(name)]
        if not names:
            raise MissingPlotDataError(", ".join(RENDERERS))
    written = []
    for name in names:
        path = RENDERERS[name](run.read_plot_data(name), run.figure_path(name))
        logger.info(f"wrote {path}")
        written.append(path)
    return written
