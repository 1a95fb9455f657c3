from src.trainer.config import TrainConfig
from src.trainer.rng import RngStreams
from src.trainer.schedule import lr_at
from src.trainer.trainer import (
    AdversarialTrainer,
    BatchRecord,
    EpochStats,
    TrainingHooks,
    TrainingResult,
    run_training,
)

__all__ = [
    "AdversarialTrainer",
    "BatchRecord",
    "EpochStats",
    "RngStreams",
    "TrainConfig",
    "TrainingHooks",
    "TrainingResult",
    "lr_at",
    "run_training",
]
