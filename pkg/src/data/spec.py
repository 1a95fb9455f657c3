"""Dataset descriptors."""

from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

DatasetName = Literal["cifar10", "svhn", "mnist-subset", "synthetic-gaussians"]

NATIVE_SHAPES = {
    "cifar10": (3, 32, 32),
    "svhn": (3, 32, 32),
    "mnist-subset": (1, 28, 28),
}


class AugmentationConfig(BaseModel):
    """
    Random crop and flip applied to clean images before the attack.

    Attributes:
        random_crop_padding (int): zero padding on every side before cropping
        horizontal_flip (bool): flip with probability 0.5
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    random_crop_padding: int = Field(default=0, ge=0)
    horizontal_flip: bool = False

    @property
    def enabled(self) -> bool:
        return self.random_crop_padding > 0 or self.horizontal_flip


class SyntheticSpec(BaseModel):
    """
    Isotropic Gaussian classes with means on a circle around (0.5, ..., 0.5).

    Attributes:
        num_features (int): dimensionality, embedded as (1, num_features, 1) images
        radius (float): distance of each class mean from the center
        std (float): per-feature standard deviation
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_features: int = Field(default=2, ge=2)
    radius: float = Field(default=0.2, gt=0)
    std: float = Field(default=0.05, gt=0)


class DatasetSpec(BaseModel):
    """
    A dataset and the split sizes drawn from it.

    Attributes:
        name (str): dataset identifier
        num_classes (int): number of classes
        train_per_class (Optional[int]): examples per class in the training
            split; None keeps the native split
        test_per_class (Optional[int]): same for the test split
        augmentation (AugmentationConfig): training-time augmentation
        synthetic (Optional[SyntheticSpec]): generative parameters of the
            synthetic dataset
        download (bool): fetch missing files from the public mirrors
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    name: DatasetName
    num_classes: int
    train_per_class: Optional[int] = None
    test_per_class: Optional[int] = None
    augmentation: AugmentationConfig = AugmentationConfig()
    synthetic: Optional[SyntheticSpec] = None
    download: bool = False

    @model_validator(mode="after")
    def validate_sizes(self) -> "DatasetSpec":
        """
        Validate the split sizes and the synthetic parameters.

        Raises:
            ValueError if a split size is not positive, a synthetic dataset has
            no sizes, or a real dataset has the wrong class count
        """
        for size in (self.train_per_class, self.test_per_class):
            if size is not None and size < 1:
                raise ValueError(f"split sizes must be positive not {size}")
        if self.name == "synthetic-gaussians":
            if self.train_per_class is None or self.test_per_class is None:
                raise ValueError("synthetic-gaussians needs train and test sizes")
            if self.num_classes < 2:
                raise ValueError("synthetic-gaussians needs at least two classes")
        elif self.num_classes != 10:
            raise ValueError(f"{self.name} has 10 classes not {self.num_classes}")
        return self

    @property
    def image_shape(self) -> Tuple[int, int, int]:
        if self.name == "synthetic-gaussians":
            synthetic = self.synthetic or SyntheticSpec()
            return (1, synthetic.num_features, 1)
        return NATIVE_SHAPES[self.name]
