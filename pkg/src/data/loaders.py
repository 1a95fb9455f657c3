"""Dataset acquisition: public binary formats, download, and synthetic problems."""

import gzip
import math
import pickle
import tarfile
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import requests
import scipy.io
import torch

from src.common.errors import DatasetMissingError
from src.common.logger import LoggingContext, get_logger
from src.data.collection import ExampleSet
from src.data.spec import DatasetSpec, SyntheticSpec

logger = get_logger(__name__)

MNIST_URL = "https://ossci-datasets.s3.amazonaws.com/mnist"
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte.gz", "train-labels-idx1-ubyte.gz"),
    "test": ("t10k-images-idx3-ubyte.gz", "t10k-labels-idx1-ubyte.gz"),
}
CIFAR10_URL = "https://www.cs.toronto.edu/~kriz/cifar-10-python.tar.gz"
CIFAR10_DIR = "cifar-10-batches-py"
SVHN_URL = "http://ufldl.stanford.edu/housenumbers"
SVHN_FILES = {"train": "train_32x32.mat", "test": "test_32x32.mat"}

_TIMEOUT = 60


def _download(url: str, destination: Path) -> None:
    destination.parent.mkdir(parents=True, exist_ok=True)
    with LoggingContext({"url": url}):
        logger.info(f"downloading to {destination}")
    response = requests.get(url, stream=True, timeout=_TIMEOUT)
    if response.status_code != 200:
        raise DatasetMissingError(
            f"download of {url} failed with status {response.status_code}",
            hint=f"place the file at {destination} manually",
        )
    tmp = destination.with_suffix(destination.suffix + ".part")
    with open(tmp, "wb") as f:
        for chunk in response.iter_content(chunk_size=1 << 20):
            f.write(chunk)
    tmp.replace(destination)


def fetch(spec: DatasetSpec, root: Path) -> None:
    """Download the files of ``spec`` that are not yet in ``root``."""
    if spec.name == "mnist-subset":
        for images, labels in MNIST_FILES.values():
            for name in (images, labels):
                path = root / "mnist" / name
                if not path.exists():
                    _download(f"{MNIST_URL}/{name}", path)
    elif spec.name == "cifar10":
        if not (root / CIFAR10_DIR).exists():
            archive = root / "cifar-10-python.tar.gz"
            if not archive.exists():
                _download(CIFAR10_URL, archive)
            with tarfile.open(archive, "r:gz") as tar:
                tar.extractall(root, filter="data")
    elif spec.name == "svhn":
        for name in SVHN_FILES.values():
            path = root / "svhn" / name
            if not path.exists():
                _download(f"{SVHN_URL}/{name}", path)


def _require(path: Path, spec: DatasetSpec) -> Path:
    if not path.exists():
        raise DatasetMissingError(
            f"{spec.name} file {path} not found",
            hint="set download: true in the dataset config or point HAM_DATA_ROOT "
            "at a directory holding the files",
        )
    return path


def _read_idx(path: Path) -> np.ndarray:
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as f:  # type: ignore[operator]
            data = f.read()
    except (OSError, EOFError) as e:
        raise DatasetMissingError(f"{path} is corrupt: {e}", hint="delete it") from e
    if len(data) < 4 or len(data) < 4 + 4 * data[3]:
        raise DatasetMissingError(
            f"{path} is truncated in its header", hint="delete and re-fetch it"
        )
    ndim = data[3]
    shape = tuple(
        int.from_bytes(data[4 + 4 * i : 8 + 4 * i], "big") for i in range(ndim)
    )
    array = np.frombuffer(data, dtype=np.uint8, offset=4 + 4 * ndim)
    if array.size != math.prod(shape):
        raise DatasetMissingError(f"{path} is truncated", hint="delete and re-fetch it")
    return array.reshape(shape)


def _read_mnist(
    root: Path, spec: DatasetSpec, split: str
) -> Tuple[np.ndarray, np.ndarray]:
    images_name, labels_name = MNIST_FILES[split]
    images = _read_idx(_require(root / "mnist" / images_name, spec))
    labels = _read_idx(_require(root / "mnist" / labels_name, spec))
    return images[:, None, :, :], labels


def _read_cifar10(
    root: Path, spec: DatasetSpec, split: str
) -> Tuple[np.ndarray, np.ndarray]:
    names = ["test_batch"]
    if split == "train":
        names = [f"data_batch_{i}" for i in range(1, 6)]
    images: List[np.ndarray] = []
    labels: List[np.ndarray] = []
    for name in names:
        path = _require(root / CIFAR10_DIR / name, spec)
        try:
            with open(path, "rb") as f:
                batch: Dict[bytes, object] = pickle.load(f, encoding="bytes")
        except (pickle.UnpicklingError, EOFError) as e:
            raise DatasetMissingError(
                f"{path} is corrupt: {e}", hint="re-fetch it"
            ) from e
        images.append(np.asarray(batch[b"data"], dtype=np.uint8).reshape(-1, 3, 32, 32))
        labels.append(np.asarray(batch[b"labels"], dtype=np.int64))
    return np.concatenate(images), np.concatenate(labels)


def _read_svhn(
    root: Path, spec: DatasetSpec, split: str
) -> Tuple[np.ndarray, np.ndarray]:
    path = _require(root / "svhn" / SVHN_FILES[split], spec)
    try:
        mat = scipy.io.loadmat(path)
    except (ValueError, OSError) as e:
        raise DatasetMissingError(f"{path} is corrupt: {e}", hint="re-fetch it") from e
    images = np.transpose(mat["X"], (3, 2, 0, 1))
    labels = mat["y"].reshape(-1).astype(np.int64) % 10
    return images, labels


_READERS = {
    "mnist-subset": _read_mnist,
    "cifar10": _read_cifar10,
    "svhn": _read_svhn,
}


def _per_class(
    labels: np.ndarray, num_classes: int, per_class: Optional[int]
) -> np.ndarray:
    """Indices of the first ``per_class`` examples of each class, in file order."""
    if per_class is None:
        return np.arange(labels.shape[0])
    keep = np.zeros(labels.shape[0], dtype=bool)
    for label in range(num_classes):
        members = np.flatnonzero(labels == label)
        if members.size < per_class:
            raise DatasetMissingError(
                f"class {label} has {members.size} examples, {per_class} requested"
            )
        keep[members[:per_class]] = True
    return np.flatnonzero(keep)


def _to_examples(
    images: np.ndarray, labels: np.ndarray, num_classes: int
) -> ExampleSet:
    return ExampleSet(
        images=torch.from_numpy(images.astype(np.float32) / 255.0),
        labels=torch.from_numpy(labels.astype(np.int64)),
        num_classes=num_classes,
    )


def class_means(spec: DatasetSpec) -> np.ndarray:
    """(num_classes, num_features) means of the synthetic classes."""
    synthetic = spec.synthetic or SyntheticSpec()
    means = np.full((spec.num_classes, synthetic.num_features), 0.5)
    angles = 2 * np.pi * np.arange(spec.num_classes) / spec.num_classes
    means[:, 0] += synthetic.radius * np.cos(angles)
    means[:, 1] += synthetic.radius * np.sin(angles)
    return means


def synthesize(spec: DatasetSpec, seed: int, split: int, per_class: int) -> ExampleSet:
    """
    Draw ``per_class`` Gaussian examples per class, clipped into [0, 1].

    Args:
        spec (DatasetSpec): a synthetic-gaussians spec
        seed (int): generator seed
        split (int): 0 for train, 1 for test; selects an independent stream
        per_class (int): examples per class
    Returns:
        ExampleSet with images of shape (N, 1, num_features, 1), class-blocked
    """
    synthetic = spec.synthetic or SyntheticSpec()
    rng = np.random.default_rng([seed, split])
    means = class_means(spec)
    size = (per_class, synthetic.num_features)
    points = [
        rng.normal(means[label], synthetic.std, size=size)
        for label in range(spec.num_classes)
    ]
    features = np.clip(np.concatenate(points), 0.0, 1.0)
    labels = np.repeat(np.arange(spec.num_classes), per_class)
    return ExampleSet(
        images=torch.from_numpy(features.astype(np.float32)).view(
            -1, 1, synthetic.num_features, 1
        ),
        labels=torch.from_numpy(labels.astype(np.int64)),
        num_classes=spec.num_classes,
    )


def load(spec: DatasetSpec, root: Path, seed: int) -> Tuple[ExampleSet, ExampleSet]:
    """
    Load the train and test splits described by ``spec``.

    Args:
        spec (DatasetSpec): dataset descriptor
        root (Path): dataset cache directory
        seed (int): seed of the synthetic generator
    Returns:
        (train, test) collections in deterministic order with values in [0, 1]
    Raises:
        DatasetMissingError if files are missing, corrupt or too small
    """
    if spec.name == "synthetic-gaussians":
        assert spec.train_per_class is not None and spec.test_per_class is not None
        return (
            synthesize(spec, seed, 0, spec.train_per_class),
            synthesize(spec, seed, 1, spec.test_per_class),
        )
    root = Path(root)
    if spec.download:
        fetch(spec, root)
    reader = _READERS[spec.name]
    splits = []
    sizes = (("train", spec.train_per_class), ("test", spec.test_per_class))
    for split, per_class in sizes:
        images, labels = reader(root, spec, split)
        index = _per_class(labels, spec.num_classes, per_class)
        splits.append(_to_examples(images[index], labels[index], spec.num_classes))
    logger.info(
        f"loaded {spec.name}: {len(splits[0])} train / {len(splits[1])} test examples"
    )
    return splits[0], splits[1]
