import logging

import pytest
from pydantic import ValidationError

from src.common.env import Settings
from src.common.errors import DatasetMissingError, HamError, NonFiniteLossError
from src.common.logger import (
    ContextFormatter,
    LoggingContext,
    get_extra_context,
    get_logger,
    set_log_level,
)


def test_settings_read_prefixed_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("HAM_DATA_ROOT", str(tmp_path))
    monkeypatch.setenv("HAM_DEFAULT_LOG_LEVEL", "debug")
    settings = Settings()
    assert settings.data_root == tmp_path
    assert settings.default_log_level == logging.DEBUG


@pytest.mark.parametrize(
    "values",
    [
        {"default_log_level": "chatty"},
        {"device": "tpu"},
        {"num_threads": 0},
    ],
)
def test_settings_validation(values):
    with pytest.raises(ValidationError):
        Settings(**values)


def test_numeric_log_level_string():
    assert Settings(default_log_level="30").default_log_level == logging.WARNING


def test_logging_context_nests_and_restores():
    with LoggingContext({"run_id": "a", "epoch": 0}):
        with LoggingContext({"epoch": 1}):
            assert get_extra_context() == {"run_id": "a", "epoch": 1}
        assert get_extra_context() == {"run_id": "a", "epoch": 0}
    assert get_extra_context() == {}


def test_context_is_appended_to_lines():
    record = logging.LogRecord("ham", logging.INFO, __file__, 1, "step", None, None)
    record.context = {"run_id": "a", "epoch": 2}
    line = ContextFormatter("%(message)s").format(record)
    assert line == "step [run_id=a epoch=2]"


def test_set_log_level_reaches_existing_loggers():
    adapter = get_logger("tests.level", level=logging.INFO)
    try:
        set_log_level(logging.DEBUG)
        assert adapter.logger.level == logging.DEBUG
        assert all(h.level == logging.DEBUG for h in adapter.logger.handlers)
    finally:
        set_log_level(None)


def test_errors_keep_builtin_bases():
    error = DatasetMissingError("missing", hint="set HAM_DATA_ROOT")
    assert isinstance(error, HamError) and isinstance(error, FileNotFoundError)
    assert str(error) == "missing; set HAM_DATA_ROOT"
    loss = NonFiniteLossError(epoch=3, batch=7, learning_rate=1e6)
    assert isinstance(loss, RuntimeError)
    assert "epoch 3, batch 7" in str(loss)
