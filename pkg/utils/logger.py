"""
Centralized Logging Utility
File logs are organized by date/time: {FDF_LOG_DIR}/{year}/{month}/{day}/log_{HH-MM}.log
All logs are also displayed on console
"""

import logging
import os
from datetime import datetime
from pathlib import Path
from typing import Optional


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _env_flag(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


class DateTimeLogger:
    """
    Centralized logger that writes to date/time organized files
    File structure: {base_dir}/{year}/{month}/{day}/log_{HH-MM}.log

    Estimation runs (fits, Monte Carlo sweeps) can be long, so every run keeps
    its own file next to the console stream.
    """

    _initialized = False
    _log_file_path: Optional[str] = None

    @classmethod
    def setup_logging(
        cls,
        base_dir: Optional[str] = None,
        log_level: Optional[str] = None,
        to_file: Optional[bool] = None
    ) -> Optional[str]:
        """
        Setup logging configuration with date/time organized files

        Args:
            base_dir: Base directory for logs (default: FDF_LOG_DIR or "Logging")
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            to_file: Write a log file as well as the console stream
                     (default: FDF_LOG_TO_FILE, true)

        Returns:
            Path of the log file, or None when file logging is disabled
        """
        if cls._initialized:
            return cls._log_file_path

        base_dir = base_dir or os.getenv("FDF_LOG_DIR", "Logging")
        log_level = log_level or os.getenv("FDF_LOG_LEVEL", "INFO")
        if to_file is None:
            to_file = _env_flag("FDF_LOG_TO_FILE", True)

        numeric_level = getattr(logging, log_level.upper(), logging.INFO)
        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        root_logger = logging.getLogger()
        root_logger.setLevel(numeric_level)
        root_logger.handlers.clear()

        console_handler = logging.StreamHandler()
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)

        if to_file:
            now = datetime.now()
            log_dir = Path(base_dir) / now.strftime("%Y") / now.strftime("%m") / now.strftime("%d")
            log_dir.mkdir(parents=True, exist_ok=True)

            # ':' is not portable in file names
            log_file_path = log_dir / f"log_{now.strftime('%H-%M')}.log"
            cls._log_file_path = str(log_file_path)

            file_handler = logging.FileHandler(log_file_path, mode='a', encoding='utf-8')
            file_handler.setLevel(numeric_level)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)

        cls._initialized = True

        if cls._log_file_path:
            root_logger.info(f"Logging initialized. Log file: {cls._log_file_path}")

        return cls._log_file_path

    @classmethod
    def set_level(cls, log_level: str):
        """Change the level of the root logger and all its handlers"""
        numeric_level = getattr(logging, log_level.upper(), logging.INFO)
        root_logger = logging.getLogger()
        root_logger.setLevel(numeric_level)
        for handler in root_logger.handlers:
            handler.setLevel(numeric_level)

    @classmethod
    def get_log_file_path(cls) -> Optional[str]:
        """Get the current log file path"""
        return cls._log_file_path


def get_logger(name: str = None) -> logging.Logger:
    """
    Get a logger instance with centralized console/file logging

    Args:
        name: Logger name (typically __name__ of the module)

    Returns:
        logging.Logger instance

    Example:
        from utils.logger import get_logger
        logger = get_logger(__name__)
        logger.info("Selected bandwidth b=6")
    """
    if not DateTimeLogger._initialized:
        DateTimeLogger.setup_logging()

    return logging.getLogger(name or __name__)


def get_current_log_file() -> Optional[str]:
    """
    Get the path to the current log file

    Returns:
        String path to the current log file (None if file logging is off)
    """
    if not DateTimeLogger._initialized:
        DateTimeLogger.setup_logging()

    return DateTimeLogger.get_log_file_path()
