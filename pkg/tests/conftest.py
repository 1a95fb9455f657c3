from pathlib import Path
from typing import Any, Dict, Iterator, Tuple

import pytest
import torch

from src.attack.config import AttackConfig
from src.core.models import Classifier, build_classifier
from src.core.types import ArchitectureSpec
from src.data.collection import ExampleSet
from src.data.loaders import synthesize
from src.data.spec import DatasetSpec
from src.experiment.config import ExperimentConfig, load_config
from src.mining.config import MiningConfig
from src.trainer.config import TrainConfig

FEATURES = (1, 2, 1)


@pytest.fixture(scope="session")
def prefect_harness() -> Iterator[None]:
    from prefect.testing.utilities import prefect_test_harness

    with prefect_test_harness():
        yield


@pytest.fixture
def linear_spec() -> ArchitectureSpec:
    return ArchitectureSpec(name="linear", num_classes=3, image_shape=FEATURES)


@pytest.fixture
def mlp_spec() -> ArchitectureSpec:
    return ArchitectureSpec(name="mlp", num_classes=3, image_shape=FEATURES, hidden=16)


@pytest.fixture
def linear_model(linear_spec: ArchitectureSpec) -> Classifier:
    return build_classifier(linear_spec, seed=0)


@pytest.fixture
def mlp_model(mlp_spec: ArchitectureSpec) -> Classifier:
    return build_classifier(mlp_spec, seed=0)


@pytest.fixture
def synthetic_spec() -> DatasetSpec:
    return DatasetSpec(
        name="synthetic-gaussians",
        num_classes=3,
        train_per_class=32,
        test_per_class=16,
    )


@pytest.fixture
def synthetic_data(synthetic_spec: DatasetSpec) -> Tuple[ExampleSet, ExampleSet]:
    return synthesize(synthetic_spec, 0, 0, 32), synthesize(synthetic_spec, 0, 1, 16)


@pytest.fixture
def attack() -> AttackConfig:
    return AttackConfig(epsilon=0.05, step_size=0.02, steps=5)


def train_config(**overrides: Any) -> TrainConfig:
    """A small training config on the synthetic problem."""
    values: Dict[str, Any] = {
        "epochs": 3,
        "batch_size": 16,
        "learning_rate": 0.1,
        "schedule": [],
        "momentum": 0.9,
        "weight_decay": 0.0,
        "seed": 0,
        "attack": AttackConfig(epsilon=0.05, step_size=0.02, steps=5),
        "mining": MiningConfig(mode="none", early_drop_step=2, start_epoch=0),
        "eval_attack": AttackConfig(
            epsilon=0.05, step_size=0.02, steps=10, random_init=False
        ),
    }
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture
def smoke_config(tmp_path: Path) -> ExperimentConfig:
    return load_config(
        preset="synthetic-smoke", overrides={"output_dir": str(tmp_path)}
    )


def batch_of(collection: ExampleSet, n: int) -> Tuple[torch.Tensor, torch.Tensor]:
    return collection.images[:n], collection.labels[:n]
