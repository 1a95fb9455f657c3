"""Experiment configuration files, presets and sweeps."""

import copy
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, NamedTuple, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.common.errors import ConfigError
from src.core.types import ArchitectureName, ArchitectureSpec
from src.data.spec import DatasetSpec
from src.trainer.config import TrainConfig

PRESETS = ("cifar10-paper", "svhn-paper", "mnist-desk", "synthetic-smoke")

SweepParameter = Literal[
    "early_drop_step", "start_epoch", "drop_rate", "lambda_shift", "mode"
]


class ModelConfig(BaseModel):
    """Architecture choice; shapes and class count come from the dataset."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: ArchitectureName
    hidden: int = Field(default=128, ge=1)


class ExperimentConfig(BaseModel):
    """
    Everything a run needs, validated before any compute.

    Attributes:
        run_id (str): name of the run directory under ``output_dir``
        output_dir (Path): parent of run directories
        eval_every (int): evaluation cadence in epochs, 0 for the last epoch only
        seeds (List[int]): seeds swept by ``ablate``; empty means ``train.seed``
        dataset (DatasetSpec): data and augmentation
        architecture (ModelConfig): classifier
        train (TrainConfig): optimization, attack and mining
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    run_id: str = Field(min_length=1)
    output_dir: Path
    eval_every: int = Field(ge=0)
    seeds: List[int] = Field(default_factory=list)
    dataset: DatasetSpec
    architecture: ModelConfig
    train: TrainConfig

    def architecture_spec(self) -> ArchitectureSpec:
        return ArchitectureSpec(
            name=self.architecture.name,
            num_classes=self.dataset.num_classes,
            image_shape=self.dataset.image_shape,
            hidden=self.architecture.hidden,
        )

    @property
    def run_dir(self) -> Path:
        return self.output_dir / self.run_id

    def sweep_seeds(self) -> List[int]:
        return list(self.seeds) or [self.train.seed]

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)


class SweepSpec(BaseModel):
    """One-parameter grid over the mining configuration."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    parameter: SweepParameter
    values: List[Union[int, float, str]] = Field(default_factory=list)
    seeds: Optional[List[int]] = None


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """Recursively overlay ``override`` on ``base``; lists are replaced whole."""
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _read_yaml(text: str, source: str) -> Dict[str, Any]:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"{source} is not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{source} must hold a mapping at the top level")
    return data


def load_preset(name: str) -> Dict[str, Any]:
    """
    Raises:
        ConfigError if no preset has this name
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name}; choose one of {', '.join(PRESETS)}")
    presets = resources.files("src.experiment.presets")
    text = presets.joinpath(f"{name}.yaml").read_text()
    return _read_yaml(text, f"preset {name}")


def format_validation_error(error: ValidationError) -> str:
    """One ``dotted.field.path: message`` line per validation failure."""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "\n".join(lines)


def validate_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    """
    Raises:
        ConfigError listing every invalid field by its dotted path
    """
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        details = format_validation_error(e)
        raise ConfigError(f"invalid configuration:\n{details}") from e


def load_config(
    path: Optional[Union[str, Path]] = None,
    preset: Optional[str] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Build a config from a preset, a YAML file on top of it and explicit overrides.

    Args:
        path: YAML file; optional when a preset is given
        preset (Optional[str]): name of a packaged preset
        overrides: nested mapping merged last
    Returns:
        the validated ExperimentConfig
    Raises:
        ConfigError if neither source is given, the file is unreadable or
        the merged mapping is invalid
    """
    if path is None and preset is None:
        raise ConfigError("give a config file, a preset or both")
    raw: Dict[str, Any] = load_preset(preset) if preset is not None else {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file {path} does not exist")
        raw = deep_merge(raw, _read_yaml(path.read_text(), str(path)))
    if overrides:
        raw = deep_merge(raw, overrides)
    return validate_config(raw)


def load_sweep(path: Union[str, Path]) -> SweepSpec:
    """
    Raises:
        ConfigError if the file is missing or names an unknown parameter
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"sweep file {path} does not exist")
    raw = _read_yaml(path.read_text(), str(path))
    try:
        return SweepSpec.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid sweep:\n{format_validation_error(e)}") from e


class SweepCell(NamedTuple):
    value: Union[int, float, str]
    seed: int
    config: ExperimentConfig


def sweep_configs(base: ExperimentConfig, sweep: SweepSpec) -> List[SweepCell]:
    """
    One child config per value and seed, each with its own run id.

    Raises:
        ConfigError if a value makes the mining configuration invalid
    """
    seeds = sweep.seeds if sweep.seeds is not None else base.sweep_seeds()
    raw = base.model_dump(mode="json")
    children = []
    for value in sweep.values:
        for seed in seeds:
            override = {
                "run_id": f"{base.run_id}-{sweep.parameter}={value}-seed{seed}",
                "train": {"seed": seed, "mining": {sweep.parameter: value}},
            }
            child = validate_config(deep_merge(raw, override))
            children.append(SweepCell(value, seed, child))
    return children
