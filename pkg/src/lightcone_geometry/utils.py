"""Shared utilities across core, CLI and tools."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd


def parse_grid_spec(text: str) -> Sequence[int]:
    """Parse ``"NUxNV"`` into (nu, nv)."""
    try:
        nu, nv = (int(part) for part in text.lower().split("x"))
    except ValueError as e:
        raise ValueError(f"grid must look like 20x20, got {text!r}") from e
    return nu, nv


def parse_rect(text: str) -> Sequence[float]:
    """Parse ``"u0,u1,v0,v1"``."""
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != 4:
        raise ValueError(f"rect must be u0,u1,v0,v1, got {text!r}")
    return tuple(float(p) for p in parts)


def save_csv(rows: List[Dict[str, Any]], path: Path) -> int:
    """Save rows to CSV and return column count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("", encoding="utf-8")
        return 0

    df = pd.DataFrame(rows)
    df.to_csv(path, index=False, float_format="%.17g")
    return len(df.columns)


def dataframe_markdown_preview(
    rows: List[Dict[str, Any]],
    preferred_cols: Optional[List[str]] = None,
    max_rows: int = 5,
    fallback_cols: int = 6,
) -> str:
    """Render a markdown table preview from row dicts."""
    if not rows:
        return "(no rows)"
    df = pd.DataFrame(rows).head(max_rows)
    preview_cols = [col for col in (preferred_cols or []) if col in df.columns]
    if not preview_cols:
        preview_cols = df.columns.tolist()[:fallback_cols]
    return df[preview_cols].to_markdown(index=False, floatfmt=".6g")
