"""Domain types shared by every module."""

from dataclasses import dataclass
from typing import Literal, Tuple

import torch
from pydantic import BaseModel, ConfigDict, field_validator

from src.common.errors import LabelOutOfRangeError, ShapeMismatchError

Mode = Literal["train", "eval"]

ArchitectureName = Literal["linear", "mlp", "small_cnn", "preact_resnet18"]


class ArchitectureSpec(BaseModel):
    """Named reference architecture plus the shape it classifies.

    Attributes:
        name: one of the reference architectures
        num_classes: number of output logits
        image_shape: (channels, height, width) of a single input
        hidden: hidden width of the MLP and the CNN head
        bias: whether the linear architecture carries a bias term
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: ArchitectureName
    num_classes: int
    image_shape: Tuple[int, int, int]
    hidden: int = 128
    bias: bool = True

    @field_validator("num_classes")
    @classmethod
    def validate_num_classes(cls, num_classes: int) -> int:
        if num_classes < 2:
            raise ValueError(f"num_classes must be at least 2 not {num_classes}")
        return num_classes


@dataclass(frozen=True)
class LabeledExample:
    """One image with values in [0, 1] and its class index."""

    image: torch.Tensor
    label: int

    def validate(self, num_classes: int) -> None:
        """Check the pixel range and label range.

        Raises:
            ShapeMismatchError if the image is not (channels, height, width)
            ValueError if a pixel lies outside [0, 1]
            LabelOutOfRangeError if the label is not in [0, num_classes)
        """
        if self.image.dim() != 3:
            raise ShapeMismatchError(
                f"image must be (channels, height, width) not {tuple(self.image.shape)}"
            )
        if bool((self.image < 0).any()) or bool((self.image > 1).any()):
            raise ValueError("image values must lie in [0, 1]")
        if not 0 <= self.label < num_classes:
            raise LabelOutOfRangeError(
                f"label {self.label} outside [0, {num_classes})"
            )

    def as_batch(self) -> Tuple[torch.Tensor, torch.Tensor]:
        """Return a batch of one: images (1, C, H, W) and labels (1,)."""
        return self.image.unsqueeze(0), torch.tensor([self.label], dtype=torch.long)
