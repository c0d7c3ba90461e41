import logging
import sys
from typing import Optional, Union

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_default_level = logging.INFO


def set_default_level(level: Union[int, str]) -> None:
    """Set the level used by loggers created after this call and update existing ones"""
    global _default_level
    _default_level = logging.getLevelName(level) if isinstance(level, str) else level
    for name in list(logging.root.manager.loggerDict):
        if name == "src" or name.startswith("src.") or name == "__main__":
            logging.getLogger(name).setLevel(_default_level)


def setup_logger(name: str, level: Optional[Union[int, str]] = None) -> logging.Logger:
    logger = logging.getLogger(name)
    if level is None:
        logger.setLevel(_default_level)
    else:
        logger.setLevel(level)

    if not logger.handlers:
        formatter = logging.Formatter(LOG_FORMAT)

        stream_handler = logging.StreamHandler(sys.stdout)
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)
        logger.propagate = False

    return logger
