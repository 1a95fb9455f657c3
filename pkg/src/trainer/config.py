"""Training hyperparameters."""

from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, model_validator

from src.attack.config import AttackConfig
from src.mining.config import MiningConfig


class TrainConfig(BaseModel):
    """
    One training run.

    Attributes:
        epochs (int): T
        batch_size (int): n_bs
        learning_rate (float): initial learning rate
        schedule: (epoch, factor) pairs; from ``epoch`` on the rate is
            ``learning_rate * factor``; factors are absolute, not compounding
        momentum (float): SGD momentum
        weight_decay (float): classical L2 weight decay
        seed (int): run seed, split into the data, attack and mask streams
        attack (AttackConfig): the training attack
        mining (MiningConfig): example selection and weighting
        eval_attack (AttackConfig): the attack used for evaluation
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int
    batch_size: int
    learning_rate: float
    schedule: List[Tuple[int, float]]
    momentum: float
    weight_decay: float
    seed: int
    attack: AttackConfig
    mining: MiningConfig
    eval_attack: AttackConfig

    @model_validator(mode="after")
    def validate_run(self) -> "TrainConfig":
        """
        Raises:
            ValueError if a scalar is out of range, the schedule is not strictly
            increasing inside [0, epochs), or M exceeds the training K
        """
        if self.epochs < 0:
            raise ValueError(f"epochs must be nonnegative not {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1 not {self.batch_size}")
        if self.learning_rate < 0:
            raise ValueError(
                f"learning_rate must be nonnegative not {self.learning_rate}"
            )
        previous = -1
        for epoch, factor in self.schedule:
            if epoch <= previous:
                raise ValueError("schedule epochs must be strictly increasing")
            if self.epochs > 0 and epoch >= self.epochs:
                raise ValueError(
                    f"schedule epoch {epoch} is not below epochs {self.epochs}"
                )
            if factor <= 0:
                raise ValueError(f"schedule factor must be positive not {factor}")
            previous = epoch
        mining = self.mining
        if mining.mode == "ham" and mining.early_drop_step > self.attack.steps:
            raise ValueError(
                f"early_drop_step {self.mining.early_drop_step} exceeds attack steps "
                f"{self.attack.steps}"
            )
        return self
