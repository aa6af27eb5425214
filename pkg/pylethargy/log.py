# -*- coding: utf-8 -*-
#
# log.py
#
# This file is part of pylethargy.
#
# pylethargy is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# pylethargy is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with pylethargy.  If not, see <https://www.gnu.org/licenses/>.

import logging
import sys

from pylethargy import APPNAME
from pylethargy.core import DATA_DIR


__all__ = ["FPATH", "logger", "setup_logger"]


def _make_handlers() -> tuple[logging.Handler, ...]:
    stream = logging.StreamHandler(stream=sys.stderr)
    stream.setLevel(logging.ERROR)  # overrides the logger's level
    try:
        DATA_DIR.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(filename=FPATH, mode="w")
    except OSError:
        # read-only home, sandboxed runs...; stderr still gets errors
        return (stream,)
    return (file_handler, stream)


# setup log folder and log file path
FPATH = str(DATA_DIR.resolve() / f"{APPNAME}.log")
HANDLERS = _make_handlers()

# set up a formatter (to be used for all handlers)
FORMATTER = logging.Formatter(
    fmt="\t".join(
        [
            "%(asctime)s",  # human-readable timestamp
            "%(funcName)s @ %(module)s",  # calling function @ module
            "(%(levelname)s) %(message)s",  # (level name) message
        ]
    ),
    datefmt="%H:%M:%S",
)


def setup_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    this_logger = logging.getLogger(name)
    this_logger.setLevel(level)
    for hand in HANDLERS:
        hand.setFormatter(FORMATTER)
        if hand not in this_logger.handlers:
            this_logger.addHandler(hand)
            this_logger.info("Loaded handler: '%s'.", hand)
    this_logger.info("Created '%s'.", this_logger)
    return this_logger


# set up the main logger and equip it; module loggers propagate to it
logger = setup_logger(APPNAME)
