"""The steps of one training run, from data to final tables."""

from pathlib import Path
from typing import Optional, Tuple

import pandas as pd

from src.common.env import Settings
from src.common.logger import LoggingContext, get_logger
from src.data.collection import ExampleSet
from src.data.loaders import load
from src.experiment.config import ExperimentConfig
from src.experiment.reports import write_fairness
from src.experiment.run_dir import RunDirectory, RunHooks
from src.metrics.fairness import FairnessReport
from src.trainer.trainer import AdversarialTrainer, TrainingResult, run_training

logger = get_logger(__name__)


def prepare_data(
    config: ExperimentConfig, settings: Optional[Settings] = None
) -> Tuple[ExampleSet, ExampleSet]:
    """
    Raises:
        DatasetMissingError if the dataset files are not in the cache
    """
    settings = settings or Settings()
    train_set, test_set = load(config.dataset, settings.data_root, config.train.seed)
    return train_set.to(settings.device), test_set.to(settings.device)


def open_run(config: ExperimentConfig, resume: bool = False) -> RunDirectory:
    """Create the run directory and snapshot the config before epoch 0."""
    run = RunDirectory.create(config.run_dir, resume=resume)
    snapshot = config.to_yaml()
    if resume and run.config_path.exists():
        if run.config_path.read_text() != snapshot:
            logger.warning(f"config differs from the snapshot in {run.root}")
    else:
        run.write_config(snapshot)
    return run


def build_trainer(
    config: ExperimentConfig,
    run: RunDirectory,
    resume: bool = False,
    settings: Optional[Settings] = None,
) -> AdversarialTrainer:
    """A fresh trainer, or one restored from the run's last checkpoint."""
    settings = settings or Settings()
    trainer = AdversarialTrainer(
        config.train,
        config.architecture_spec(),
        augmentation=config.dataset.augmentation,
        num_threads=settings.num_threads,
        device=settings.device,
    )
    if resume and run.last_checkpoint.exists():
        trainer.resume(run.last_checkpoint)
    elif resume:
        logger.warning(f"no checkpoint in {run.root}; starting from epoch 0")
    discarded = run.discard_from(trainer.next_epoch) if resume else 0
    if discarded:
        logger.info(f"discarded {discarded} records past the checkpoint")
    return trainer


def train(
    config: ExperimentConfig,
    trainer: AdversarialTrainer,
    run: RunDirectory,
    train_set: ExampleSet,
    test_set: ExampleSet,
) -> TrainingResult:
    with LoggingContext({"run_id": config.run_id}):
        result = run_training(
            trainer, train_set, test_set, config.eval_every, RunHooks(run)
        )
    if not run.last_checkpoint.exists():
        trainer.save(run.last_checkpoint)
    return result


def finish(run: RunDirectory) -> Path:
    """Write the epoch table and the tables of the last evaluation."""
    epochs = run.records("epoch")
    if epochs:
        frame = pd.DataFrame(epochs).drop(columns=["kind", "timestamp"])
        run.write_table("epochs", frame)
    evaluations = run.records("evaluation")
    if evaluations:
        write_fairness(run, FairnessReport.from_dict(evaluations[-1]))
    return run.root


def execute_run(
    config: ExperimentConfig,
    resume: bool = False,
    settings: Optional[Settings] = None,
) -> Path:
    """
    Train one configuration start to finish.

    The dataset is loaded before the run directory exists, so a missing
    dataset leaves nothing behind.

    Returns:
        the run directory
    """
    settings = settings or Settings()
    train_set, test_set = prepare_data(config, settings)
    run = open_run(config, resume)
    trainer = build_trainer(config, run, resume, settings)
    train(config, trainer, run, train_set, test_set)
    return finish(run)
