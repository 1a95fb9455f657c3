"""Run directory layout and the append-only metrics log."""

import json
import shutil
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.common.errors import ConfigError, MissingPlotDataError
from src.common.logger import get_logger
from src.metrics.fairness import FairnessReport
from src.trainer.trainer import (
    AdversarialTrainer,
    BatchRecord,
    EpochStats,
    TrainingHooks,
)

logger = get_logger(__name__)

CONFIG_FILE = "config.yaml"
METRICS_FILE = "metrics.jsonl"
CHECKPOINT_DIR = "checkpoints"
LAST_CHECKPOINT = "last.pt"
PLOT_DATA_DIR = "plot-data"
TABLE_DIR = "tables"
FIGURE_DIR = "figures"


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunDirectory(object):
    """
    One run on disk::

        <root>/config.yaml
        <root>/metrics.jsonl
        <root>/checkpoints/last.pt
        <root>/plot-data/<series>.csv
        <root>/tables/<name>.csv, <name>.json
        <root>/figures/<name>.png
    """

    def __init__(self, root: Union[str, Path]) -> None:
        self.root = Path(root)

    @classmethod
    def create(cls, root: Union[str, Path], resume: bool = False) -> "RunDirectory":
        """
        Raises:
            ConfigError if a previous run lives there and ``resume`` is False
        """
        run = cls(root)
        if run.metrics_path.exists() and not resume:
            raise ConfigError(
                f"run directory {run.root} already holds a run; pass --resume or "
                "choose another run id"
            )
        run.root.mkdir(parents=True, exist_ok=True)
        return run

    @property
    def config_path(self) -> Path:
        return self.root / CONFIG_FILE

    @property
    def metrics_path(self) -> Path:
        return self.root / METRICS_FILE

    @property
    def last_checkpoint(self) -> Path:
        return self.root / CHECKPOINT_DIR / LAST_CHECKPOINT

    def write_config(self, text: str) -> Path:
        self.config_path.write_text(text)
        return self.config_path

    def append(self, kind: str, epoch: int, record: Dict[str, Any]) -> None:
        """Append one record tagged with its kind, epoch and a UTC timestamp."""
        line = {"kind": kind, "epoch": epoch, "timestamp": _timestamp(), **record}
        with open(self.metrics_path, "a") as f:
            f.write(json.dumps(line) + "\n")

    def records(self, kind: Optional[str] = None) -> List[Dict[str, Any]]:
        if not self.metrics_path.exists():
            return []
        with open(self.metrics_path) as f:
            rows = [json.loads(line) for line in f if line.strip()]
        return [r for r in rows if kind is None or r["kind"] == kind]

    def discard_from(self, epoch: int) -> int:
        """Drop records of epochs not yet checkpointed; returns how many went."""
        rows = self.records()
        kept = [r for r in rows if r["epoch"] < epoch]
        tmp = self.metrics_path.with_suffix(".tmp")
        with open(tmp, "w") as f:
            for row in kept:
                f.write(json.dumps(row) + "\n")
        shutil.move(str(tmp), str(self.metrics_path))
        return len(rows) - len(kept)

    def write_table(self, name: str, frame: pd.DataFrame) -> Path:
        """CSV and JSON renderings of the same table."""
        folder = self.root / TABLE_DIR
        folder.mkdir(parents=True, exist_ok=True)
        frame.to_csv(folder / f"{name}.csv", index=False)
        frame.to_json(folder / f"{name}.json", orient="records", indent=2)
        return folder / f"{name}.csv"

    def read_table(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.root / TABLE_DIR / f"{name}.csv")

    def write_plot_data(self, series: str, frame: pd.DataFrame) -> Path:
        folder = self.root / PLOT_DATA_DIR
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"{series}.csv"
        frame.to_csv(path, index=False)
        return path

    def has_plot_data(self, series: str) -> bool:
        return (self.root / PLOT_DATA_DIR / f"{series}.csv").exists()

    def read_plot_data(self, series: str) -> pd.DataFrame:
        """
        Raises:
            MissingPlotDataError if the series was never written
        """
        if not self.has_plot_data(series):
            raise MissingPlotDataError(series)
        return pd.read_csv(self.root / PLOT_DATA_DIR / f"{series}.csv")

    def figure_path(self, name: str) -> Path:
        folder = self.root / FIGURE_DIR
        folder.mkdir(parents=True, exist_ok=True)
        return folder / f"{name}.png"


class RunHooks(TrainingHooks):
    """Persists training events: records to the metrics log, a checkpoint per epoch."""

    def __init__(self, run: RunDirectory) -> None:
        self.run = run

    def batch(self, record: BatchRecord) -> None:
        self.run.append("batch", record.epoch, record.to_record())

    def epoch(self, trainer: AdversarialTrainer, stats: EpochStats) -> None:
        self.run.append("epoch", stats.epoch, stats.to_record())
        trainer.save(self.run.last_checkpoint)

    def evaluation(self, epoch: int, report: FairnessReport) -> None:
        self.run.append("evaluation", epoch, report.to_dict())
