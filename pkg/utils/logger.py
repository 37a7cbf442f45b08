"""Logging helpers for SurfaceScope."""

import logging
import os
from datetime import datetime

from SurfaceScope.config import LOG_LEVEL_ENV


class HintFormatter(logging.Formatter):
    """Prefix each message with a millisecond time stamp."""

    def format(self, record):
        time_prefix = datetime.strftime(
            datetime.fromtimestamp(record.created), "%Y-%m-%d %H:%M:%S.%f"
        )
        time_prefix = time_prefix[:-3] + "$ "
        return time_prefix + record.getMessage()


def get_logger(name):
    """Return the package logger for a module."""
    logger = logging.getLogger("SurfaceScope").getChild(name.split(".")[-1])
    root = logging.getLogger("SurfaceScope")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(HintFormatter())
        root.addHandler(handler)
        root.setLevel(os.environ.get(LOG_LEVEL_ENV, "WARNING").upper())
    return logger


def set_verbose(verbose=True):
    """Lower the package log level to INFO."""
    get_logger(__name__)
    logging.getLogger("SurfaceScope").setLevel(
        logging.INFO if verbose else logging.WARNING
    )
