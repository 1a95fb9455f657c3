"""Deterministic mini-batch streams."""

import math
from typing import Iterator, Tuple

import numpy as np
import torch

from src.common.splitter import split_list
from src.data.collection import ExampleSet

Batch = Tuple[torch.Tensor, torch.Tensor]


def epoch_permutation(n: int, seed: int, epoch: int) -> np.ndarray:
    """Permutation of range(n) fixed by (seed, epoch)."""
    return np.random.default_rng([seed, epoch]).permutation(n)


def num_batches(n: int, batch_size: int) -> int:
    return math.ceil(n / batch_size)


def batches(
    collection: ExampleSet,
    batch_size: int,
    seed: int,
    epoch: int,
    shuffle: bool = True,
) -> Iterator[Batch]:
    """
    Yield (images, labels) mini-batches covering the collection exactly once.

    Args:
        collection (ExampleSet): examples to batch
        batch_size (int): n_bs; the final short batch is kept
        seed (int): shuffling seed
        epoch (int): epoch index mixed into the permutation
        shuffle (bool): keep the stored order when False
    Returns:
        Iterator over ceil(N / batch_size) batches
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1 not {batch_size}")
    n = len(collection)
    order = epoch_permutation(n, seed, epoch) if shuffle else np.arange(n)
    for chunk in split_list(order, batch_size):
        index = torch.as_tensor(np.asarray(chunk), dtype=torch.long)
        yield collection.images[index], collection.labels[index]
