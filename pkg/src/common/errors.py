"""Faults raised across the package."""

from typing import Optional


class HamError(Exception):
    """Base class of every expected fault."""


class ConfigError(HamError, ValueError):
    """A configuration file or sweep spec could not be used."""


class ShapeMismatchError(HamError, ValueError):
    """An input does not match the architecture or its counterpart."""


class LabelOutOfRangeError(HamError, ValueError):
    """A class index is outside [0, num_classes)."""


class NonFiniteGradientError(HamError, RuntimeError):
    """A parameter or input gradient holds NaN or Inf."""


class NonFiniteLogitsError(HamError, ValueError):
    """A forward pass produced NaN or Inf logits."""


class NonFiniteLossError(HamError, RuntimeError):
    """A training batch produced a NaN or Inf loss."""

    def __init__(self, epoch: int, batch: int, learning_rate: float) -> None:
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch} "
            f"(learning rate {learning_rate:g}); run aborted"
        )
        self.epoch = epoch
        self.batch = batch
        self.learning_rate = learning_rate


class CheckpointVersionError(HamError, RuntimeError):
    """A checkpoint was written by an incompatible format version."""


class CorruptCheckpointError(HamError, RuntimeError):
    """A checkpoint file is truncated or otherwise unreadable."""


class AttackConfigMismatchError(HamError, ValueError):
    """A resumed attack was given a different config than the original run."""


class EmptyClassError(HamError, ValueError):
    """A class has no examples to aggregate over."""

    def __init__(self, label: int) -> None:
        super().__init__(f"class {label} has no examples")
        self.label = label


class DatasetMissingError(HamError, FileNotFoundError):
    """Dataset files are absent or unreadable."""

    def __init__(self, message: str, hint: Optional[str] = None) -> None:
        super().__init__(message if hint is None else f"{message}; {hint}")
        self.hint = hint


class MissingPlotDataError(HamError, FileNotFoundError):
    """A plot was requested for a data series that was never written."""

    def __init__(self, series: str) -> None:
        super().__init__(f"missing plot data series: {series}")
        self.series = series


class NonDifferentiableError(HamError, RuntimeError):
    """The loss has no gradient path to the requested tensor."""
