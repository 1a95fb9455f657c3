"""Reference classifiers and the forward contract every module drives."""

import threading
from typing import List

import torch
import torch.nn.functional as F
from torch import nn

from src.common.errors import ShapeMismatchError
from src.core.types import ArchitectureSpec, Mode

# model construction draws from the global torch RNG
_INIT_LOCK = threading.Lock()


class Classifier(nn.Module):
    """A differentiable map from (N, C, H, W) images to (N, num_classes) logits."""

    def __init__(self, spec: ArchitectureSpec) -> None:
        super().__init__()
        self.spec = spec

    @property
    def num_classes(self) -> int:
        return self.spec.num_classes

    def check_input(self, images: torch.Tensor) -> None:
        """Reject a batch whose per-example shape differs from the descriptor."""
        if images.dim() != 4 or tuple(images.shape[1:]) != self.spec.image_shape:
            raise ShapeMismatchError(
                f"{self.spec.name} expects images of shape (N, "
                f"{', '.join(str(d) for d in self.spec.image_shape)}) "
                f"not {tuple(images.shape)}"
            )


class LinearClassifier(Classifier):
    def __init__(self, spec: ArchitectureSpec) -> None:
        super().__init__(spec)
        channels, height, width = spec.image_shape
        self.fc = nn.Linear(channels * height * width, spec.num_classes, bias=spec.bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc(torch.flatten(x, 1))


class MLP(Classifier):
    """Two fully connected layers with a ReLU between them."""

    def __init__(self, spec: ArchitectureSpec) -> None:
        super().__init__(spec)
        channels, height, width = spec.image_shape
        self.fc1 = nn.Linear(channels * height * width, spec.hidden)
        self.fc2 = nn.Linear(spec.hidden, spec.num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc2(F.relu(self.fc1(torch.flatten(x, 1))))


def _conv_block(in_channels: int, out_channels: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_channels, out_channels, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_channels),
        nn.ReLU(),
    )


class SmallCNN(Classifier):
    """Four conv blocks, two max-pools and a two-layer head."""

    def __init__(self, spec: ArchitectureSpec) -> None:
        super().__init__(spec)
        channels, height, width = spec.image_shape
        if height < 4 or width < 4:
            raise ShapeMismatchError(
                f"small_cnn needs images of at least 4x4 not {height}x{width}"
            )
        self.features = nn.Sequential(
            _conv_block(channels, 32),
            _conv_block(32, 32),
            nn.MaxPool2d(2),
            _conv_block(32, 64),
            _conv_block(64, 64),
            nn.MaxPool2d(2),
        )
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(64 * (height // 4) * (width // 4), spec.hidden),
            nn.ReLU(),
            nn.Linear(spec.hidden, spec.num_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


class PreActBlock(nn.Module):
    expansion = 1

    def __init__(self, in_planes: int, planes: int, stride: int = 1) -> None:
        super().__init__()
        self.bn1 = nn.BatchNorm2d(in_planes)
        self.conv1 = nn.Conv2d(
            in_planes, planes, kernel_size=3, stride=stride, padding=1, bias=False
        )
        self.bn2 = nn.BatchNorm2d(planes)
        self.conv2 = nn.Conv2d(
            planes, planes, kernel_size=3, stride=1, padding=1, bias=False
        )
        self.shortcut: nn.Module = nn.Identity()
        if stride != 1 or in_planes != planes:
            self.shortcut = nn.Conv2d(
                in_planes, planes, kernel_size=1, stride=stride, bias=False
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = F.relu(self.bn1(x))
        shortcut = x if isinstance(self.shortcut, nn.Identity) else self.shortcut(out)
        out = self.conv1(out)
        out = self.conv2(F.relu(self.bn2(out)))
        return out + shortcut


class PreActResNet18(Classifier):
    def __init__(self, spec: ArchitectureSpec) -> None:
        super().__init__(spec)
        channels = spec.image_shape[0]
        self.conv1 = nn.Conv2d(
            channels, 64, kernel_size=3, stride=1, padding=1, bias=False
        )
        layers: List[nn.Module] = []
        in_planes = 64
        for planes, stride in ((64, 1), (128, 2), (256, 2), (512, 2)):
            layers.append(PreActBlock(in_planes, planes, stride))
            layers.append(PreActBlock(planes, planes, 1))
            in_planes = planes
        self.layers = nn.Sequential(*layers)
        self.bn = nn.BatchNorm2d(512)
        self.linear = nn.Linear(512, spec.num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = self.layers(self.conv1(x))
        out = F.relu(self.bn(out))
        out = F.adaptive_avg_pool2d(out, 1)
        return self.linear(torch.flatten(out, 1))


_ARCHITECTURES = {
    "linear": LinearClassifier,
    "mlp": MLP,
    "small_cnn": SmallCNN,
    "preact_resnet18": PreActResNet18,
}


def build_classifier(
    spec: ArchitectureSpec, seed: int, dtype: torch.dtype = torch.float32
) -> Classifier:
    """Build a reference architecture with parameters drawn from ``seed``.

    Args:
        spec (ArchitectureSpec): architecture descriptor
        seed (int): initialization seed; the global RNG is left untouched
        dtype (torch.dtype): float32 for training, float64 for gradient checks
    Returns:
        Classifier
    """
    with _INIT_LOCK, torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = _ARCHITECTURES[spec.name](spec)
    return model.to(dtype=dtype)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def forward(model: Classifier, images: torch.Tensor, mode: Mode) -> torch.Tensor:
    """Compute logits with stochastic layers in ``mode``.

    Attack generation and evaluation use "eval"; the weight-update forward
    uses "train" and updates normalization statistics.

    Raises:
        ShapeMismatchError if ``images`` does not match the descriptor
    """
    model.check_input(images)
    model.train(mode == "train")
    return model(images)  # type: ignore[no-any-return]


def predict(logits: torch.Tensor) -> torch.Tensor:
    """Greedy class; ties go to the lowest class index."""
    return logits.argmax(dim=1)
