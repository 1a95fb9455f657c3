"""Attack parameters."""

from typing import Literal

from pydantic import BaseModel, ConfigDict, model_validator


class AttackConfig(BaseModel):
    """
    PGD attack parameters, all in pixel units of images scaled to [0, 1].

    Attributes:
        epsilon (float): perturbation budget; 0 makes the attack a no-op
        step_size (float): magnitude of one ascent step
        steps (int): total number of iterations K
        norm (str): "inf" or "2"
        random_init (bool): start from a uniform point of the epsilon-ball
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float
    step_size: float
    steps: int
    norm: Literal["inf", "2"] = "inf"
    random_init: bool = True

    @model_validator(mode="after")
    def validate_budget(self) -> "AttackConfig":
        """
        Validate the budget, step size and step count together.

        Returns:
            The validated config.
        Raises:
            ValueError if a value is out of range, or if an infinity-norm step
            is larger than twice the budget
        """
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be nonnegative not {self.epsilon}")
        if self.step_size <= 0:
            raise ValueError(f"step_size must be positive not {self.step_size}")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1 not {self.steps}")
        too_large = self.epsilon > 0 and self.step_size > 2 * self.epsilon
        if self.norm == "inf" and too_large:
            raise ValueError(
                f"step_size {self.step_size} exceeds twice epsilon {self.epsilon}; "
                "iterates would oscillate between faces of the ball"
            )
        return self
