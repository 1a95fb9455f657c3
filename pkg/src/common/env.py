"""The full configuration."""

import logging
from pathlib import Path
from typing import Union

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Encapsulate configuration provided via env variables or the filesystem.

    Attributes:
        data_root (Path): root of the dataset cache; overridden by HAM_DATA_ROOT
        device (str): torch device every run is placed on
        num_threads (int): torch intra-op threads; 1 keeps runs bit-reproducible
        default_log_level (int): default output level given to loggers.
            Can be integer or predefined levels in logging (e.g. INFO, DEBUG)
    """

    data_root: Path = Path("./data")
    device: str = "cpu"
    num_threads: int = 1
    default_log_level: int = logging.INFO
    model_config = SettingsConfigDict(
        env_prefix="HAM_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    @field_validator("device")
    @classmethod
    def validate_device(
        cls,
        device: str,
    ) -> str:
        """
        Validate the device string.

        Args:
            device (str): a torch device string such as "cpu" or "cuda:0"
        Returns:
            The validated device string.
        Raises:
            ValueError if the device type is unknown
        """
        if device.split(":")[0] not in {"cpu", "cuda", "mps"}:
            raise ValueError(f"device must be cpu, cuda or mps not {device}")
        return device

    @field_validator("num_threads")
    @classmethod
    def validate_num_threads(
        cls,
        num_threads: int,
    ) -> int:
        """
        Validate the thread count.

        Args:
            num_threads (int): torch intra-op thread count
        Returns:
            The validated thread count.
        Raises:
            ValueError if the count is not positive
        """
        if num_threads < 1:
            raise ValueError(f"num_threads must be positive not {num_threads}")
        return num_threads

    @field_validator("default_log_level", mode="before")
    @classmethod
    def validate_log_level(
        cls,
        default_log_level: Union[int, str],
    ) -> int:
        """
        Validate the default log level.

        Args:
            default_log_level: provided log level.  This could also be in string format
               for the coming logging levels (e.g. INFO, DEBUG)
        Returns:
            The validated default log level.
        Raises:
            ValueError if a string is provided that is not a known log level
        """
        if isinstance(default_log_level, str):
            if default_log_level.isnumeric():
                default_log_level = int(default_log_level)
            else:
                level = getattr(logging, default_log_level.upper(), None)
                if not isinstance(level, int):
                    raise ValueError(f"unknown log level {default_log_level}")
                default_log_level = level
        return default_log_level
