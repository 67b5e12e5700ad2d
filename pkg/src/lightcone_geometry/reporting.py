"""Deterministic JSON reports and per-point CSV dumps for CLI runs.

Every report has the same top-level layout::

    {command, config_echo, grid, results, residual_summary{max, mean, argmax_point}, status}

Floats are written with 17 significant digits; NaN and infinities become
``null``.  Keys keep insertion order, so identical runs give identical bytes.
"""

import logging
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from .utils import save_csv

logger = logging.getLogger(__name__)


class Status(str, Enum):
    OK = "ok"
    NEGATIVE = "negative"
    ERROR = "error"


EXIT_CODES = {Status.OK: 0, Status.NEGATIVE: 2, Status.ERROR: 1}


class ResidualSummary(BaseModel):
    max: float = 0.0
    mean: float = 0.0
    argmax_point: Optional[List[float]] = None


class Report(BaseModel):
    command: str
    config_echo: Dict[str, Any] = Field(default_factory=dict)
    grid: Dict[str, Any] = Field(default_factory=dict)
    results: Dict[str, Any] = Field(default_factory=dict)
    residual_summary: ResidualSummary = Field(default_factory=ResidualSummary)
    status: Status = Status.OK

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> str:
        return dumps(self.model_dump(mode="python")) + "\n"


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    if x == 0.0:
        return "0.0"
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in ('"', "\\"):
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, Enum):
        return _encode(obj.value, indent, level)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return _string(obj)
    if isinstance(obj, BaseModel):
        return _encode(obj.model_dump(mode="python"), indent, level)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, np.number, type(None))) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_encode(x, indent, level + 1) for x in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__} in a report")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with fixed float formatting."""
    return _encode(obj, indent, 0)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_report(report: Report, out: Optional[Path] = None, fmt: str = "json",
                 rows: Optional[List[Dict[str, Any]]] = None) -> None:
    """Write the JSON report, or the per-point rows as CSV, to ``out`` (stdout when None).

    With ``fmt="csv"`` and an ``out`` path the JSON report is written next to it
    as ``<out>.json``.
    """
    text = report.to_json()
    if fmt == "csv":
        if out is None:
            pd.DataFrame(rows or []).to_csv(sys.stdout, index=False, float_format="%.17g")
            return
        columns = save_csv(rows or [], Path(out))
        logger.info("wrote %d rows x %d columns to %s", len(rows or []), columns, out)
        Path(out).with_suffix(Path(out).suffix + ".json").write_text(text, encoding="utf-8")
        return
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(text, encoding="utf-8")
    logger.info("wrote report to %s", out)
