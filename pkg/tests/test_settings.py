import logging

import pytest

from config import settings
from config.settings import ConfigurationError
from utils.errors import (
    BandwidthError,
    FdfError,
    IllConditionedInverseError,
    InputError,
    LagRangeError,
    ParameterError,
    ParseError,
    SchemaError,
    UnderdeterminedFitError,
    ConditioningError,
)
from utils.logger import DateTimeLogger, get_current_log_file, get_logger


def test_defaults():
    effective = settings.validate_settings()
    assert effective["k0"] == settings.K0
    assert 0.0 < effective["p_share"] < 1.0
    assert settings.ZERO_EIGENVALUE == 1e-10


def test_read_int(monkeypatch):
    monkeypatch.setenv("FDF_TEST_VALUE", "12")
    assert settings._read_int("FDF_TEST_VALUE", 3) == 12
    monkeypatch.setenv("FDF_TEST_VALUE", " ")
    assert settings._read_int("FDF_TEST_VALUE", 3) == 3
    monkeypatch.setenv("FDF_TEST_VALUE", "twelve")
    with pytest.raises(ConfigurationError, match="FDF_TEST_VALUE"):
        settings._read_int("FDF_TEST_VALUE", 3)


def test_read_float(monkeypatch):
    monkeypatch.setenv("FDF_TEST_SHARE", "0.95")
    assert settings._read_float("FDF_TEST_SHARE", 0.9) == 0.95
    monkeypatch.setenv("FDF_TEST_SHARE", "most")
    with pytest.raises(ConfigurationError):
        settings._read_float("FDF_TEST_SHARE", 0.9)


@pytest.mark.parametrize("error, parent", [
    (LagRangeError, ParameterError),
    (BandwidthError, ParameterError),
    (UnderdeterminedFitError, ConditioningError),
    (IllConditionedInverseError, ConditioningError),
    (ParseError, InputError),
    (SchemaError, InputError),
    (ConfigurationError, FdfError),
])
def test_error_hierarchy(error, parent):
    assert issubclass(error, parent)
    assert issubclass(error, FdfError)


def test_parse_error_location():
    error = ParseError("non-numeric value 'x'", row=4, column=2)
    assert (error.row, error.column) == (4, 2)
    assert str(error) == "non-numeric value 'x' (row 4, column 2)"
    assert str(ParseError("empty", row=1)) == "empty (row 1)"


def test_logger_without_file():
    logger = get_logger("fdf.test")
    assert isinstance(logger, logging.Logger)
    assert get_current_log_file() is None


def test_set_level():
    DateTimeLogger.set_level("WARNING")
    try:
        assert logging.getLogger().level == logging.WARNING
    finally:
        DateTimeLogger.set_level("INFO")
