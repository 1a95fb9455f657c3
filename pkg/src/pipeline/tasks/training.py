"""Training flow tasks."""

from pathlib import Path
from typing import Tuple

from prefect import task
from prefect.cache_policies import NO_CACHE
from prefect.logging import get_run_logger

from src.common.env import Settings
from src.data.collection import ExampleSet
from src.experiment import runner
from src.experiment.config import ExperimentConfig
from src.experiment.run_dir import RunDirectory
from src.trainer.trainer import AdversarialTrainer, TrainingResult


@task(cache_policy=NO_CACHE)
def load_datasets(
    config: ExperimentConfig, settings: Settings
) -> Tuple[ExampleSet, ExampleSet]:
    """Load the train and test splits.

    Args:
        config (ExperimentConfig): the run configuration
        settings (Settings): the settings attached to the flow
    Returns:
        (train, test) example sets
    """
    logger = get_run_logger()
    logger.info(f"loading {config.dataset.name} from {settings.data_root}")
    return runner.prepare_data(config, settings)


@task(cache_policy=NO_CACHE)
def open_run_directory(config: ExperimentConfig, resume: bool) -> RunDirectory:
    """Create the run directory and write the config snapshot.

    Args:
        config (ExperimentConfig): the run configuration
        resume (bool): continue a run already in the directory
    Returns:
        RunDirectory
    """
    logger = get_run_logger()
    logger.info(f"opening run directory {config.run_dir}")
    return runner.open_run(config, resume)


@task(cache_policy=NO_CACHE)
def instantiate_trainer(
    config: ExperimentConfig, run: RunDirectory, resume: bool, settings: Settings
) -> AdversarialTrainer:
    """Instantiate the trainer, restoring the last checkpoint when resuming.

    Args:
        config (ExperimentConfig): the run configuration
        run (RunDirectory): where checkpoints live
        resume (bool): restore the last checkpoint
        settings (Settings): the settings attached to the flow
    Returns:
        AdversarialTrainer
    """
    logger = get_run_logger()
    logger.info(f"instantiating the trainer, mining mode {config.train.mining.mode}")
    return runner.build_trainer(config, run, resume, settings)


@task(cache_policy=NO_CACHE)
def train_model(
    config: ExperimentConfig,
    trainer: AdversarialTrainer,
    run: RunDirectory,
    train_set: ExampleSet,
    test_set: ExampleSet,
) -> TrainingResult:
    """Run the remaining epochs.

    Args:
        config (ExperimentConfig): the run configuration
        trainer (AdversarialTrainer): the instantiated trainer
        run (RunDirectory): receives records and checkpoints
        train_set (ExampleSet): training examples
        test_set (ExampleSet): evaluation examples
    Returns:
        TrainingResult
    """
    logger = get_run_logger()
    logger.info(f"training epochs {trainer.next_epoch}..{config.train.epochs - 1}")
    return runner.train(config, trainer, run, train_set, test_set)


@task(cache_policy=NO_CACHE)
def write_tables(run: RunDirectory) -> Path:
    """Write the final tables of the run.

    Args:
        run (RunDirectory): the finished run
    Returns:
        Path of the run directory
    """
    logger = get_run_logger()
    logger.info(f"writing tables to {run.root}")
    return runner.finish(run)


@task(cache_policy=NO_CACHE)
def train_child(config: ExperimentConfig, settings: Settings) -> Path:
    """Train one sweep cell in its own run directory.

    Args:
        config (ExperimentConfig): the child configuration
        settings (Settings): the settings attached to the flow
    Returns:
        Path of the child run directory
    """
    logger = get_run_logger()
    logger.info(f"training sweep cell {config.run_id}")
    return runner.execute_run(config, resume=False, settings=settings)
