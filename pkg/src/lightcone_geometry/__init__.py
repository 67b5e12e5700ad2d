"""Conformal geometry of timelike surfaces in the light-cone model."""

import logging
import os
import sys

__version__ = "0.1.0"

# ---------------------------------------------------------------------------
# Configure the package-level logger once.  A single StreamHandler on stderr
# collects every child logger (lightcone_geometry.core.frame, ...).  stdout is
# reserved for CLI reports and MCP JSON-RPC traffic.
# ---------------------------------------------------------------------------
_root_logger = logging.getLogger("lightcone_geometry")
if not _root_logger.handlers:
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter("[%(levelname)s] %(message)s"))
    _root_logger.addHandler(_handler)

LEVEL_MAP = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARN": logging.WARNING,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}

_root_logger.setLevel(LEVEL_MAP.get(os.environ.get("LCGEOM_LOG", "WARNING").upper(), logging.WARNING))


def set_log_level(value: str) -> None:
    """Set the package log level from a name such as ``"INFO"``."""
    _root_logger.setLevel(LEVEL_MAP.get(value.upper(), logging.INFO))
