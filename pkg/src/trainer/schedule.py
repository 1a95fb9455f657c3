"""Piecewise-constant learning rate."""

from typing import Sequence, Tuple


def lr_at(
    schedule: Sequence[Tuple[int, float]], learning_rate: float, epoch: int
) -> float:
    """
    Learning rate at ``epoch``.

    Args:
        schedule: strictly increasing (epoch, factor) pairs
        learning_rate (float): the rate before the first trigger
        epoch (int): 0-based epoch index
    Returns:
        ``learning_rate`` times the factor of the latest trigger at or before
        ``epoch``, or ``learning_rate`` when none has fired
    """
    factor = 1.0
    for trigger, value in schedule:
        if trigger <= epoch:
            factor = value
    return learning_rate * factor
