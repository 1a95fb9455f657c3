"""Named random streams for a training run."""

from typing import Dict

import numpy as np
import torch

STREAMS = ("data", "attack", "mask")


class RngStreams(object):
    """
    Independent torch generators for augmentation, attack initialization and
    drop masks, all derived from one seed.

    Consuming one stream never shifts another, so switching a baseline's mask
    draws on or off leaves the attack starts unchanged.
    """

    def __init__(self, seed: int) -> None:
        self.seed = seed
        children = np.random.SeedSequence(seed).spawn(len(STREAMS))
        self._generators: Dict[str, torch.Generator] = {}
        for name, child in zip(STREAMS, children):
            generator = torch.Generator()
            generator.manual_seed(int(child.generate_state(1)[0]))
            self._generators[name] = generator

    @property
    def data(self) -> torch.Generator:
        return self._generators["data"]

    @property
    def attack(self) -> torch.Generator:
        return self._generators["attack"]

    @property
    def mask(self) -> torch.Generator:
        return self._generators["mask"]

    def state(self) -> Dict[str, torch.Tensor]:
        return {name: g.get_state() for name, g in self._generators.items()}

    def set_state(self, state: Dict[str, torch.Tensor]) -> None:
        """
        Raises:
            KeyError if a stream is missing from ``state``
        """
        for name, generator in self._generators.items():
            generator.set_state(state[name])
