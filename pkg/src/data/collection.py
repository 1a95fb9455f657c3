"""In-memory example collections."""

from dataclasses import dataclass
from typing import Iterator, List

import torch

from src.core.types import LabeledExample


@dataclass
class ExampleSet:
    """Images of shape (N, C, H, W) in [0, 1] with labels of shape (N,)."""

    images: torch.Tensor
    labels: torch.Tensor
    num_classes: int

    def __post_init__(self) -> None:
        if self.images.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __iter__(self) -> Iterator[LabeledExample]:
        for image, label in zip(self.images, self.labels):
            yield LabeledExample(image=image, label=int(label))

    def subset(self, index: torch.Tensor) -> "ExampleSet":
        return ExampleSet(self.images[index], self.labels[index], self.num_classes)

    def class_counts(self) -> List[int]:
        return torch.bincount(self.labels, minlength=self.num_classes).tolist()

    def to(self, device: str) -> "ExampleSet":
        return ExampleSet(
            self.images.to(device), self.labels.to(device), self.num_classes
        )
