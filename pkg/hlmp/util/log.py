# Copyright (c) 2024 S. Holzapfel <me@sebholzapfel.com>
#
# SPDX-License-Identifier: BSD-3-Clause
"""
Coloured console logging for the ``hlmp`` logger tree.

Lines look like ``[INF t=0.123456] message``, ``t`` being seconds since the
logging module was loaded. ``HLMP_LOG_LEVEL`` (a level name such as
``DEBUG``) overrides the level picked by the caller.
"""

import logging
import os
import sys

from colorama import Fore, Style

_TAGS = {
    logging.DEBUG:    ("DBG", Style.DIM),
    logging.INFO:     ("INF", Fore.GREEN),
    logging.WARNING:  ("WRN", Fore.YELLOW),
    logging.ERROR:    ("ERR", Fore.RED),
    logging.CRITICAL: ("ERR", Fore.RED + Style.BRIGHT),
}


class ColorFormatter(logging.Formatter):

    def __init__(self, *, color=True):
        super().__init__()
        self.color = color

    def format(self, record):
        tag, style = _TAGS.get(record.levelno, ("LOG", ""))
        if self.color:
            tag = f"{style}{tag}{Style.RESET_ALL}"
        line = f"[{tag} t={record.relativeCreated / 1e3:.6f}] {record.getMessage()}"
        if record.exc_info:
            line += "\n" + self.formatException(record.exc_info)
        return line


def _level_from_env(default):
    name = os.environ.get("HLMP_LOG_LEVEL")
    if not name:
        return default
    level = logging.getLevelName(name.strip().upper())
    return level if isinstance(level, int) else default


def configure(level=logging.WARNING, stream=None):
    """
    Route ``hlmp`` log records to ``stream`` (stderr by default). Calling it
    again replaces the previous handler.
    """
    stream = stream or sys.stderr
    logger = logging.getLogger("hlmp")
    for handler in list(logger.handlers):
        if getattr(handler, "_hlmp_console", False):
            logger.removeHandler(handler)
    handler = logging.StreamHandler(stream)
    handler.setFormatter(ColorFormatter(color=stream.isatty()))
    handler._hlmp_console = True
    logger.addHandler(handler)
    logger.setLevel(_level_from_env(level))
    logger.propagate = False
    return logger
