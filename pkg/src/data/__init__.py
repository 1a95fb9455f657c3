"""Datasets, augmentation and batching."""

from src.data.augment import augment, augment_batch, crop, horizontal_flip
from src.data.batching import batches, epoch_permutation, num_batches
from src.data.collection import ExampleSet
from src.data.loaders import class_means, fetch, load, synthesize
from src.data.spec import AugmentationConfig, DatasetSpec, SyntheticSpec

__all__ = [
    "AugmentationConfig",
    "DatasetSpec",
    "ExampleSet",
    "SyntheticSpec",
    "augment",
    "augment_batch",
    "batches",
    "class_means",
    "crop",
    "epoch_permutation",
    "fetch",
    "horizontal_flip",
    "load",
    "num_batches",
    "synthesize",
]
