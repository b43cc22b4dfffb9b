"""Logging configuration."""
import logging
import os
import sys
import pytz
from pathlib import Path
from datetime import datetime


class UTCFormatter(logging.Formatter):
    """Formatter that renders timestamps in UTC."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.tz = pytz.utc

    def formatTime(self, record, datefmt=None):
        """Convert timestamp to UTC."""
        ct = datetime.fromtimestamp(record.created, tz=self.tz)
        if datefmt:
            return ct.strftime(datefmt)
        return ct.strftime(self.default_time_format)


def _level_from_env(default: int) -> int:
    name = os.getenv('QG_LOG_LEVEL')
    if not name:
        return default
    return getattr(logging, name.upper(), default)


def setup_logger(name: str = "qg_halfspace", level: int = logging.INFO) -> logging.Logger:
    """
    Set up and configure logger with UTC timestamps.
    Logs to console (stdout) and, unless QG_LOG_TO_FILE=false, to
    logs/qg_YYYY-MM-DD.log.

    Args:
        name: Logger name
        level: Logging level (overridden by QG_LOG_LEVEL when set)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    level = _level_from_env(level)
    logger.setLevel(level)

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    formatter = UTCFormatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S %Z'
    )

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if os.getenv('QG_LOG_TO_FILE', 'true').lower() != 'true':
        return logger

    try:
        # Project root (this file is in src/utils/)
        project_root = Path(__file__).parent.parent.parent
        logs_dir = project_root / 'logs'
        logs_dir.mkdir(parents=True, exist_ok=True)

        today = datetime.now(pytz.utc).strftime('%Y-%m-%d')
        log_file = logs_dir / f'qg_{today}.log'

        file_handler = logging.FileHandler(log_file, mode='a', encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    except Exception as e:
        # If file logging fails, continue with console logging only
        logger.warning(f"Failed to set up file logging: {e}")

    return logger
