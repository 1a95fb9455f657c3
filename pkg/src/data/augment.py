"""Random crop and horizontal flip."""

from typing import Optional, Tuple

import torch
import torch.nn.functional as F

from src.core.types import LabeledExample
from src.data.spec import AugmentationConfig


def horizontal_flip(images: torch.Tensor) -> torch.Tensor:
    """Mirror the width axis of an image or a batch."""
    return images.flip(-1)


def crop(image: torch.Tensor, padding: int, offset: Tuple[int, int]) -> torch.Tensor:
    """Zero-pad by ``padding`` and cut the original size at (top, left) ``offset``."""
    if padding == 0:
        return image
    _, height, width = image.shape
    padded = F.pad(image, (padding, padding, padding, padding))
    top, left = offset
    return padded[:, top : top + height, left : left + width]


def sample_crop_offsets(
    n: int, padding: int, generator: Optional[torch.Generator] = None
) -> torch.Tensor:
    """(n, 2) offsets drawn uniformly from {0, ..., 2 * padding} per axis."""
    return torch.randint(0, 2 * padding + 1, (n, 2), generator=generator)


def augment(
    example: LabeledExample,
    config: AugmentationConfig,
    generator: Optional[torch.Generator] = None,
    force_flip: Optional[bool] = None,
) -> LabeledExample:
    """
    Pad-and-crop to the original size, then flip with probability 0.5.

    Args:
        example (LabeledExample): clean example
        config (AugmentationConfig): padding and flip switch
        generator (Optional[torch.Generator]): the data stream
        force_flip (Optional[bool]): override the coin flip
    Returns:
        LabeledExample with values still in [0, 1]
    """
    image = example.image
    if config.random_crop_padding > 0:
        offset = sample_crop_offsets(1, config.random_crop_padding, generator)[0]
        top, left = int(offset[0]), int(offset[1])
        image = crop(image, config.random_crop_padding, (top, left))
    flip = force_flip
    if flip is None and config.horizontal_flip:
        flip = bool(torch.rand(1, generator=generator) < 0.5)
    if flip:
        image = horizontal_flip(image)
    return LabeledExample(image=image, label=example.label)


def augment_batch(
    images: torch.Tensor,
    config: AugmentationConfig,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """Batched ``augment``; consumes the stream only for enabled transforms."""
    if not config.enabled:
        return images
    n = images.shape[0]
    out = images
    if config.random_crop_padding > 0:
        padding = config.random_crop_padding
        offsets = sample_crop_offsets(n, padding, generator)
        out = torch.stack(
            [
                crop(image, padding, (int(top), int(left)))
                for image, (top, left) in zip(out, offsets)
            ]
        )
    if config.horizontal_flip:
        flips = (torch.rand(n, generator=generator) < 0.5).to(out.device)
        out = torch.where(flips.view(-1, 1, 1, 1), horizontal_flip(out), out)
    return out
