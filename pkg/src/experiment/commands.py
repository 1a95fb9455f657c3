"""The operations behind the CLI subcommands."""

from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd
import torch
from prefect.task_runners import ThreadPoolTaskRunner

from src.common.env import Settings
from src.common.errors import ConfigError
from src.common.logger import get_logger
from src.core.checkpoint import load_checkpoint
from src.core.models import Classifier
from src.data.collection import ExampleSet
from src.experiment.config import ExperimentConfig, load_config, load_sweep
from src.experiment.plotting import render
from src.experiment.reports import (
    comparison_table,
    expand_run_dirs,
    write_diagnostics,
    write_fairness,
)
from src.experiment.run_dir import CHECKPOINT_DIR, CONFIG_FILE, RunDirectory
from src.experiment.runner import prepare_data
from src.metrics.diagnostics import (
    OverconfidenceReport,
    StepHistogram,
    overconfidence_report,
    step_histogram,
)
from src.metrics.fairness import FairnessReport, fairness_report
from src.metrics.outcomes import collect_outcomes
from src.pipeline.flows.ablation.ablation import (
    AblationParameters,
    adversarial_ablation,
)
from src.pipeline.flows.training.training import (
    TrainingParameters,
    adversarial_training,
)

logger = get_logger(__name__)


def cmd_train(config: ExperimentConfig, resume: bool = False) -> Path:
    """Train ``config`` through the training flow; returns the run directory."""
    return adversarial_training(TrainingParameters(config=config, resume=resume))


def _config_for(
    checkpoint: Path, config: Optional[ExperimentConfig]
) -> ExperimentConfig:
    """The given config, else the snapshot of the run the checkpoint belongs to."""
    if config is not None:
        return config
    checkpoint = Path(checkpoint)
    for folder in (checkpoint.parent, checkpoint.parent.parent):
        if folder.name != CHECKPOINT_DIR and (folder / CONFIG_FILE).exists():
            return load_config(folder / CONFIG_FILE)
    raise ConfigError(
        f"no config snapshot found next to {checkpoint}; pass --config or --preset"
    )


def _restore(
    checkpoint: Path, config: Optional[ExperimentConfig], settings: Settings
) -> Tuple[ExperimentConfig, Classifier]:
    config = _config_for(checkpoint, config)
    model = load_checkpoint(checkpoint).restore_model().to(settings.device)
    return config, model


def _output(out: Optional[Path], checkpoint: Path) -> RunDirectory:
    if out is None:
        checkpoint = Path(checkpoint)
        parent = checkpoint.parent
        out = parent.parent if parent.name == CHECKPOINT_DIR else parent
    out.mkdir(parents=True, exist_ok=True)
    return RunDirectory(out)


def evaluate_model(
    model: Classifier, test_set: ExampleSet, config: ExperimentConfig
) -> FairnessReport:
    generator = torch.Generator().manual_seed(config.train.seed)
    outcomes = collect_outcomes(
        model, test_set, config.train.eval_attack, generator=generator
    )
    return fairness_report(outcomes, test_set.num_classes)


def cmd_evaluate(
    checkpoint: Path,
    config: Optional[ExperimentConfig] = None,
    out: Optional[Path] = None,
    settings: Optional[Settings] = None,
) -> FairnessReport:
    """
    Fairness tables of a checkpoint under the evaluation attack.

    Raises:
        EmptyClassError if a class has no test examples
    """
    settings = settings or Settings()
    config, model = _restore(checkpoint, config, settings)
    _, test_set = prepare_data(config, settings)
    report = evaluate_model(model, test_set, config)
    run = _output(out, checkpoint)
    write_fairness(run, report)
    logger.info(
        f"avg rob={report.avg_robust:.4f} worst rob={report.worst_robust:.4f} "
        f"tables in {run.root}"
    )
    return report


def cmd_diagnose(
    checkpoint: Path,
    config: Optional[ExperimentConfig] = None,
    out: Optional[Path] = None,
    split: str = "test",
    settings: Optional[Settings] = None,
) -> Tuple[OverconfidenceReport, StepHistogram]:
    """
    Over-confidence and minimal-step diagnostics under the training attack.
    """
    if split not in ("train", "test"):
        raise ConfigError(f"split must be train or test not {split}")
    settings = settings or Settings()
    config, model = _restore(checkpoint, config, settings)
    train_set, test_set = prepare_data(config, settings)
    dataset = train_set if split == "train" else test_set
    attack = config.train.attack
    generator = torch.Generator().manual_seed(config.train.seed)
    outcomes = collect_outcomes(model, dataset, attack, generator=generator)
    overconfidence = overconfidence_report(outcomes, dataset.num_classes)
    histogram = step_histogram(outcomes, attack.steps)
    report = fairness_report(outcomes, dataset.num_classes)
    early_drop_step = min(config.train.mining.early_drop_step, attack.steps)
    run = _output(out, checkpoint)
    write_diagnostics(run, overconfidence, report, histogram, early_drop_step)
    logger.info(
        f"easy at step {early_drop_step}: "
        f"{histogram.easy_fraction(early_drop_step):.3f}, never crossed among them: "
        f"{histogram.early_drop_precision(early_drop_step):.3f}"
    )
    return overconfidence, histogram


def cmd_ablate(config: ExperimentConfig, sweep_path: Path, jobs: int = 1) -> Path:
    """
    Train one child run per sweep value and seed, up to ``jobs`` at a time.

    Returns:
        the ablation directory with ``tables/summary.csv``
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be at least 1 not {jobs}")
    sweep = load_sweep(sweep_path)
    flow = adversarial_ablation.with_options(
        task_runner=ThreadPoolTaskRunner(max_workers=jobs)
    )
    return flow(AblationParameters(config=config, sweep=sweep))


def cmd_plot(directory: Path, series: Optional[Sequence[str]] = None) -> List[Path]:
    return render(RunDirectory(directory), series)


def cmd_report(run_dirs: Sequence[Path], out: Path) -> pd.DataFrame:
    """
    Comparison table over runs, relative to the first one.

    Raises:
        ConfigError if no run directory is found
    """
    runs = expand_run_dirs(run_dirs)
    if not runs:
        raise ConfigError("no run directories found")
    frame = comparison_table(runs)
    out.mkdir(parents=True, exist_ok=True)
    RunDirectory(out).write_table("comparison", frame)
    return frame
