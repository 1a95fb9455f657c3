"""Mining parameters."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, model_validator

MiningMode = Literal["none", "ham", "random_drop", "confidence_drop"]


class MiningConfig(BaseModel):
    """
    How adversarial examples are selected and weighted.

    Attributes:
        mode (str): "none" (plain PGD-AT), "ham", or one of the dropping baselines
        early_drop_step (int): M, the step at which easy examples are dropped
        start_epoch (int): first epoch at which mining is active
        lambda_shift (float): shift inside the sigmoid weight
        drop_rate (float): fraction dropped by the baseline modes
        normalization (str): divide the weighted loss by the batch size ("batch")
            or by the number of kept examples ("kept")
        force_all_hard (bool): treat every example as hard at step M
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: MiningMode
    early_drop_step: int
    start_epoch: int
    lambda_shift: float = 0.0
    drop_rate: float = 0.0
    normalization: Literal["batch", "kept"] = "batch"
    force_all_hard: bool = False

    @model_validator(mode="after")
    def validate_ranges(self) -> "MiningConfig":
        """
        Validate the step, epoch and rate ranges.

        Raises:
            ValueError if a value is out of range or a drop rate is set for a
            mode that does not use it
        """
        if self.early_drop_step < 1:
            raise ValueError(
                f"early_drop_step must be at least 1 not {self.early_drop_step}"
            )
        if self.start_epoch < 0:
            raise ValueError(f"start_epoch must be nonnegative not {self.start_epoch}")
        if not 0 <= self.drop_rate < 1:
            raise ValueError(f"drop_rate must lie in [0, 1) not {self.drop_rate}")
        if self.drop_rate > 0 and self.mode not in ("random_drop", "confidence_drop"):
            raise ValueError(
                f"drop_rate is only used by the dropping baselines not {self.mode}"
            )
        return self

    def active(self, epoch: int) -> bool:
        """Whether mining replaces plain PGD-AT at ``epoch``."""
        return self.mode != "none" and epoch >= self.start_epoch
