import logging
import sys

from src.config import settings

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logger(name: str, level: int | str | None = None) -> logging.Logger:
    """
    Module logger writing to stdout and, when LOG_FILE is set, to that file.

    Args:
        name (str): The name of the logger (usually __name__).
        level (int | str | None): The logging level; defaults to settings.LOG_LEVEL.

    Returns:
        logging.Logger: Configured logger instance.
    """
    if level is None:
        level = settings.LOG_LEVEL.upper()

    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Handlers are attached once per logger name
    if not logger.handlers:
        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        handlers: list[logging.Handler] = [logging.StreamHandler(sys.stdout)]
        if settings.LOG_FILE:
            handlers.append(logging.FileHandler(settings.LOG_FILE, encoding="utf-8"))
        for handler in handlers:
            handler.setLevel(level)
            handler.setFormatter(formatter)
            logger.addHandler(handler)

    return logger
