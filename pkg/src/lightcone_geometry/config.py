"""Tolerances, run settings and TOML config loading."""

import logging
import os
import sys
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, ValidationError, field_validator

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ChartSyntaxError, ChartValidationError

logger = logging.getLogger(__name__)

ENV_PREFIX = "LCGEOM_TOL_"
DEFAULT_JET_ORDER = 6


class Tolerances(BaseModel):
    """Named numerical thresholds.

    Every field can be overridden by ``LCGEOM_TOL_<NAME>`` or ``--tol name=value``.
    """
    model_config = {"extra": "forbid"}

    null: float = 1e-8
    causal: float = 1e-8
    pivot: float = 1e-10
    jet: float = 1e-12
    asymptotic: float = 1e-9
    frame: float = 1e-10
    structure: float = 1e-8
    integrability: float = 1e-7
    classify: float = 1e-6
    fixed_direction: float = 1e-6
    willmore: float = 1e-6
    parallel: float = 1e-6
    separability: float = 1e-6
    umbilic: float = 1e-9
    thomsen: float = 1e-7
    compatibility: float = 1e-6
    branch: float = 1e-6
    blowup: float = 1e6

    def with_overrides(self, overrides: Optional[Dict[str, float]] = None) -> "Tolerances":
        if not overrides:
            return self
        data = self.model_dump()
        unknown = sorted(set(overrides) - set(data))
        if unknown:
            raise ValueError(f"Unknown tolerance name(s): {', '.join(unknown)}")
        data.update({k: float(v) for k, v in overrides.items()})
        return Tolerances.model_validate(data)


def load_tolerances(overrides: Optional[Dict[str, float]] = None) -> Tolerances:
    """Build tolerances from defaults, environment variables and explicit overrides.

    Priority order:
    1. ``overrides`` (CLI ``--tol``)
    2. Environment variables ``LCGEOM_TOL_<NAME>``
    3. Defaults

    Returns:
        Tolerances instance
    """
    env: Dict[str, float] = {}
    for name in Tolerances.model_fields:
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is None:
            continue
        try:
            env[name] = float(raw)
        except ValueError:
            logger.warning("Ignoring non-numeric %s%s=%r", ENV_PREFIX, name.upper(), raw)
    if env:
        logger.info("Loaded tolerance overrides from environment: %s", ", ".join(sorted(env)))
    return Tolerances().with_overrides(env).with_overrides(overrides)


def parse_tol_flags(flags: List[str]) -> Dict[str, float]:
    """Parse repeated ``name=value`` flags."""
    out: Dict[str, float] = {}
    for flag in flags or []:
        name, sep, value = flag.partition("=")
        if not sep:
            raise ValueError(f"Expected name=value, got {flag!r}")
        out[name.strip()] = float(value)
    return out


# ---------------------------------------------------------------------------
# Chart / pair config files
# ---------------------------------------------------------------------------

class ChartSource(str, Enum):
    R31 = "R31"
    S31 = "S31"
    H31 = "H31"
    LIGHTCONE = "lightcone"


class PairMode(str, Enum):
    FIELDS = "fields"
    DUAL = "dual"
    DARBOUX = "darboux"
    TRIVIAL_POINT = "trivial_point"


class PairFields(BaseModel):
    model_config = {"extra": "forbid"}

    a: str = "0"
    b: str = "0"
    xi: str = "0"


class ChartConfig(BaseModel):
    """Validated contents of a chart (and optional pair) config file."""
    model_config = {"extra": "forbid", "populate_by_name": True}

    catalog: Optional[str] = None
    source: Optional[ChartSource] = None
    components: List[str] = Field(default_factory=list)
    domain: Optional[Tuple[float, float, float, float]] = None
    params: Dict[str, float] = Field(default_factory=dict)

    mode: Optional[PairMode] = None
    fields: Optional[PairFields] = None
    theta: Optional[float] = None
    init: Optional[Tuple[float, float, float]] = None
    point: Optional[List[float]] = Field(None, alias="P")

    @field_validator("domain")
    @classmethod
    def _ordered_domain(cls, value):
        if value is not None and (value[0] >= value[1] or value[2] >= value[3]):
            raise ValueError("domain must be [u0, u1, v0, v1] with u0 < u1 and v0 < v1")
        return value


def _line_col(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def load_config_text(text: str) -> ChartConfig:
    """Parse chart config text (TOML) into a validated ChartConfig."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        line = getattr(e, "lineno", None) or 1
        col = getattr(e, "colno", None) or 1
        raise ChartSyntaxError(str(e).split(" (at")[0], line, col) from e
    try:
        cfg = ChartConfig.model_validate(raw)
    except ValidationError as e:
        raise ChartValidationError(f"Invalid chart config: {e}") from e
    if cfg.catalog is None and (cfg.source is None or not cfg.components):
        raise ChartValidationError("Chart config needs either 'catalog' or 'source' + 'components'")
    return cfg


def expression_position(text: str, expression: str, offset: int) -> Tuple[int, int]:
    """Map an offset inside an expression string back to (line, column) of the config text."""
    start = text.find(expression)
    if start < 0:
        return 1, offset + 1
    return _line_col(text, start + offset)


class RunConfig(BaseModel):
    """Settings for one CLI run."""
    model_config = {"extra": "forbid"}

    nu: int = Field(20, ge=4)
    nv: int = Field(20, ge=4)
    rect: Optional[Tuple[float, float, float, float]] = None
    order: int = Field(DEFAULT_JET_ORDER, ge=2)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    workers: int = Field(4, ge=1)
