"""The adversarial training flow."""

from pathlib import Path

from prefect import flow, get_run_logger
from pydantic import BaseModel

from src.common.env import Settings
from src.experiment.config import ExperimentConfig
from src.pipeline.common import generate_flow_run_name
from src.pipeline.tasks.training import (
    instantiate_trainer,
    load_datasets,
    open_run_directory,
    train_model,
    write_tables,
)


class TrainingParameters(BaseModel):
    config: ExperimentConfig
    resume: bool = False


@flow(flow_run_name=generate_flow_run_name)
def adversarial_training(training_parameters: TrainingParameters) -> Path:
    """
    Flow to train one configuration into its run directory.

    Args:
        training_parameters: TrainingParameters
    Returns:
        Path of the run directory
    """
    logger = get_run_logger()
    config = training_parameters.config
    resume = training_parameters.resume
    settings = Settings()
    logger.info(f"using settings: {settings}")

    logger.info("loading the data")
    train_set, test_set = load_datasets(config=config, settings=settings)

    logger.info("preparing the run directory")
    run = open_run_directory(config=config, resume=resume)

    logger.info("creating the trainer object")
    trainer = instantiate_trainer(
        config=config, run=run, resume=resume, settings=settings
    )

    logger.info("training the model")
    train_model(
        config=config, trainer=trainer, run=run, train_set=train_set, test_set=test_set
    )

    logger.info("writing the tables")
    return write_tables(run=run)


if __name__ == "__main__":
    from src.experiment.config import load_config

    adversarial_training.serve(
        name="adversarial-training",
        parameters={
            "training_parameters": TrainingParameters(
                config=load_config(preset="mnist-desk")
            )
        },
    )
