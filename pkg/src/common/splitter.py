"""Split sequences into consecutive chunks."""

from typing import List, Sequence, TypeVar

T = TypeVar("T")


def split_list(target: Sequence[T], amount: int = 6) -> List[Sequence[T]]:
    """Take an arbitrary sequence and split it into chunks of ``amount`` items.

    The last chunk is kept even when it is shorter.

    Args:
        target (Sequence[T]): the target sequence to split
        amount (int): the amount for each chunk to contain
    Returns:
        List[Sequence[T]]
    Raises:
        ValueError if amount is not positive
    """
    if amount < 1:
        raise ValueError(f"amount must be positive not {amount}")
    return [target[x : x + amount] for x in range(0, len(target), amount)]
