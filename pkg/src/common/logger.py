"""Module for the contextual logger.

Every line carries the key=value context pushed with ``LoggingContext``
(run id, epoch, mining mode) so interleaved child runs of an ablation can be
told apart in one stream.
"""

import logging
from threading import local
from typing import Any, Dict, List, MutableMapping, Optional, Tuple

from src.common.env import Settings


_THREAD_LOCAL_VARS = local()

_LOG_LEVEL: Optional[int] = None

_LOGGERS: List[logging.Logger] = []

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_extra_context() -> Dict[str, Any]:
    """Get log context for the current thread."""
    if not hasattr(_THREAD_LOCAL_VARS, "log_context"):
        _THREAD_LOCAL_VARS.log_context = {}
    return _THREAD_LOCAL_VARS.log_context


def set_extra_context(context: Dict[str, Any]) -> None:
    """Replace the log context of the current thread."""
    _THREAD_LOCAL_VARS.log_context = context


def _apply_level(logger: logging.Logger, level: int) -> None:
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


def set_log_level(level: Optional[int]) -> None:
    """
    Override the settings level for every logger handed out so far and later.

    Args:
        level: a ``logging`` level, or None to fall back to the settings level
    """
    global _LOG_LEVEL  # pylint: disable=global-statement
    _LOG_LEVEL = level
    effective = level if level is not None else Settings().default_log_level
    for logger in _LOGGERS:
        _apply_level(logger, effective)


class ContextFormatter(logging.Formatter):
    """Formatter that appends the thread's logging context as key=value pairs."""

    def format(self, record: logging.LogRecord) -> str:
        line = super().format(record)
        context = getattr(record, "context", None)
        if not context:
            return line
        pairs = " ".join(f"{key}={value}" for key, value in context.items())
        return f"{line} [{pairs}]"


class ContextAwareLogAdapter(logging.LoggerAdapter):
    """Adapter that snapshots the thread's context onto each record.

    See
    https://docs.python.org/3/howto/logging-cookbook.html#using-loggeradapters-to-impart-contextual-information    # noqa
    """

    def process(self, msg: str, kwargs: MutableMapping[str, Any]) -> Tuple[str, Any]:
        context = get_extra_context()
        if context:
            kwargs.setdefault("extra", {})["context"] = dict(context)
        return msg, kwargs


class LoggingContext:
    """Push key=value pairs onto the thread's context for the enclosed block.

    Nested blocks merge, inner keys win; leaving a block restores the outer
    context exactly.
    """

    def __init__(self, context: Dict[str, Any]) -> None:
        self._new_context = context
        self._old_context: Dict[str, Any] = {}

    def __enter__(self) -> "LoggingContext":
        self._old_context = get_extra_context()
        set_extra_context({**self._old_context, **self._new_context})
        return self

    def __exit__(self, *exc: Tuple[Any, ...]) -> None:
        set_extra_context(self._old_context)


def get_logger(name: str, level: Optional[int] = None) -> ContextAwareLogAdapter:
    """
    Return a context-aware logger.

    Args:
        name: The unique name of the logger
        level: The logger level; defaults to ``set_log_level`` if called,
            else ``Settings.default_log_level``
    """
    if level is None:
        level = _LOG_LEVEL if _LOG_LEVEL is not None else Settings().default_log_level

    logger = logging.getLogger(name)
    if not logger.handlers:
        ch = logging.StreamHandler()
        ch.setFormatter(ContextFormatter(_FORMAT))
        logger.addHandler(ch)
        logger.propagate = False
    if logger not in _LOGGERS:
        _LOGGERS.append(logger)
    _apply_level(logger, level)
    return ContextAwareLogAdapter(logger, {})
