"""The ablation flow: one training run per sweep value and seed."""

from pathlib import Path

import pandas as pd
from prefect import flow, get_run_logger
from pydantic import BaseModel

from src.common.env import Settings
from src.experiment.config import ExperimentConfig, SweepSpec, sweep_configs
from src.experiment.reports import SUMMARY_COLUMNS, run_summary
from src.experiment.run_dir import RunDirectory
from src.pipeline.common import generate_flow_run_name
from src.pipeline.tasks.training import train_child

SUMMARY_KEYS = ["parameter", "value", "seed", "run"]


class AblationParameters(BaseModel):
    config: ExperimentConfig
    sweep: SweepSpec


def ablation_root(config: ExperimentConfig, sweep: SweepSpec) -> Path:
    return config.output_dir / f"{config.run_id}-ablate-{sweep.parameter}"


@flow(flow_run_name=generate_flow_run_name)
def adversarial_ablation(ablation_parameters: AblationParameters) -> Path:
    """
    Flow to train every cell of a one-parameter sweep.

    Cells run concurrently up to the task runner's worker limit, each in its
    own run directory under the ablation directory.

    Args:
        ablation_parameters: AblationParameters
    Returns:
        Path of the ablation directory holding ``tables/summary.csv``
    """
    logger = get_run_logger()
    sweep = ablation_parameters.sweep
    root = ablation_root(ablation_parameters.config, sweep)
    base = ablation_parameters.config.model_copy(update={"output_dir": root})
    settings = Settings()

    cells = sweep_configs(base, sweep)
    logger.info(f"sweeping {sweep.parameter} over {len(cells)} runs")
    summary = RunDirectory(root)
    root.mkdir(parents=True, exist_ok=True)

    futures = [train_child.submit(config=c.config, settings=settings) for c in cells]
    rows = []
    for cell, future in zip(cells, futures):
        child = RunDirectory(future.result())
        rows.append(
            {
                "parameter": sweep.parameter,
                "value": cell.value,
                "seed": cell.seed,
                **run_summary(child),
            }
        )
        logger.info(f"finished {cell.config.run_id}")

    columns = (
        SUMMARY_KEYS + ["mode"] + SUMMARY_COLUMNS + ["attack_steps", "wall_seconds"]
    )
    frame = pd.DataFrame(rows).reindex(columns=columns)
    summary.write_table("summary", frame)
    summary.write_plot_data("sweep", frame)
    return root
