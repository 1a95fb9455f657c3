"""Checkpoint container: architecture, parameters, optimizer buffers, epoch, RNG."""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import torch

from src.common.errors import CheckpointVersionError, CorruptCheckpointError
from src.common.logger import get_logger
from src.core.models import Classifier, build_classifier
from src.core.types import ArchitectureSpec

logger = get_logger(__name__)

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """Everything needed to resume a run at the start of ``epoch + 1``."""

    architecture: ArchitectureSpec
    model_state: Dict[str, torch.Tensor]
    optimizer_state: Dict[str, Any]
    epoch: int
    rng_state: Dict[str, torch.Tensor] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    def restore_model(self, dtype: torch.dtype = torch.float32) -> Classifier:
        model = build_classifier(self.architecture, seed=0, dtype=dtype)
        model.load_state_dict(self.model_state)
        return model


def save_checkpoint(
    path: Union[str, Path],
    model: Classifier,
    optimizer: torch.optim.Optimizer,
    epoch: int,
    rng_state: Optional[Dict[str, torch.Tensor]] = None,
) -> Path:
    """Write a checkpoint; the file is replaced atomically.

    Args:
        path: destination file
        model (Classifier): model whose state is saved
        optimizer (torch.optim.Optimizer): optimizer whose buffers are saved
        epoch (int): index of the last completed epoch
        rng_state: named generator states, see ``RngStreams.state``
    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": FORMAT_VERSION,
        "architecture": model.spec.model_dump(),
        "model_state": {k: v.detach().clone() for k, v in model.state_dict().items()},
        "optimizer_state": optimizer.state_dict(),
        "epoch": epoch,
        "rng_state": dict(rng_state or {}),
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    os.replace(tmp, path)
    logger.debug(f"wrote checkpoint for epoch {epoch} to {path}")
    return path


def load_checkpoint(
    path: Union[str, Path], map_location: Union[str, torch.device] = "cpu"
) -> Checkpoint:
    """Read a checkpoint written by ``save_checkpoint``.

    Raises:
        FileNotFoundError if the file does not exist
        CorruptCheckpointError if the file is truncated or malformed
        CheckpointVersionError if it was written by another format version
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint {path} does not exist")
    try:
        payload = torch.load(path, map_location=map_location, weights_only=True)
    except Exception as e:  # torch raises several unrelated types on bad archives
        raise CorruptCheckpointError(f"checkpoint {path} is unreadable: {e}") from e
    if not isinstance(payload, dict) or "format_version" not in payload:
        raise CorruptCheckpointError(f"checkpoint {path} has no format version")
    if payload["format_version"] != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint {path} has format version {payload['format_version']}, "
            f"expected {FORMAT_VERSION}"
        )
    try:
        architecture = ArchitectureSpec(**payload["architecture"])
        return Checkpoint(
            architecture=architecture,
            model_state=payload["model_state"],
            optimizer_state=payload["optimizer_state"],
            epoch=int(payload["epoch"]),
            rng_state=payload["rng_state"],
            format_version=payload["format_version"],
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptCheckpointError(f"checkpoint {path} is malformed: {e}") from e


def restore_training_state(
    checkpoint: Checkpoint, model: Classifier, optimizer: torch.optim.Optimizer
) -> Tuple[int, Dict[str, torch.Tensor]]:
    """Load parameters and optimizer buffers in place.

    Returns:
        (next epoch to run, RNG state)
    """
    if checkpoint.architecture != model.spec:
        raise CheckpointVersionError(
            f"checkpoint architecture {checkpoint.architecture} does not match "
            f"{model.spec}"
        )
    model.load_state_dict(checkpoint.model_state)
    optimizer.load_state_dict(checkpoint.optimizer_state)
    return checkpoint.epoch + 1, checkpoint.rng_state
