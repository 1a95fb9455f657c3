"""Utility functions for the flows and tasks."""

from typing import Any

from prefect.runtime import flow_run


def _run_id(parameters: Any) -> str:
    config = parameters["config"] if isinstance(parameters, dict) else parameters.config
    return config["run_id"] if isinstance(config, dict) else config.run_id


def generate_flow_run_name() -> str:
    flow_name = flow_run.flow_name
    parameters = flow_run.parameters
    for key in ("training_parameters", "ablation_parameters"):
        if key in parameters:
            return f"{flow_name}-{_run_id(parameters[key])}"
    return str(flow_name)
