import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from src.config import settings

CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{extra[name]}</cyan> - "
    "<level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[name]}:{function}:{line} - {message}"


def setup_logging(log_file: bool = True, level: Optional[str] = None):
    """Configure loguru for simulator runs.

    Diagnostics go to stderr so that reports on stdout stay machine-readable.
    """
    level = (level or settings.log_level).upper()
    logger.remove()
    logger.configure(extra={"name": "gcsim"})

    logger.add(sys.stderr, level=level, format=CONSOLE_FORMAT, colorize=True)

    if not log_file:
        return logger

    log_path = Path(settings.log_file)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    logger.add(
        str(log_path),
        level=level,
        format=FILE_FORMAT,
        rotation="10 MB",
        retention="10 days",
        compression="zip"
    )

    return logger


def get_logger(name: str = __name__):
    """Logger bound to a module name, shown in every record."""
    return logger.bind(name=name)
