"""Surface sources: space-form charts, their light-cone lifts and classical invariants.

Charts come either from the packaged catalog (``charts/*.toml``) or from a
user config in the same format::

    source = "R31"                 # R31 | S31 | H31 | lightcone
    components = ["cos((u+v)/2)", "sin((u+v)/2)", "(u-v)/2"]
    domain = [-2, 2, -2, 2]        # u0, u1, v0, v1
    params.r = 1.0
"""

from __future__ import annotations

import dataclasses
import logging
from importlib import resources
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..config import ChartConfig, ChartSource, load_config_text
from ..errors import (
    ChartValidationError,
    DegenerateConformalFactorError,
    DomainError,
)
from .expressions import Expression, parse_expression
from .jets import Jet2, JetVector
from .pseudo_linear import AMBIENT, MetricSignature, PseudoVector

logger = logging.getLogger(__name__)

CATALOG_NAMES = ("cylinder_r31", "nullsum_minimal_r31", "clifford_s31", "plane_r31")
EPS_ASYMPTOTIC = 1e-9
EPS_CONSTRAINT = 1e-10
EPS_CONFORMAL = 1e-12
_DOMAIN_SLACK = 1e-12

SPACE_SIGNATURES = {
    ChartSource.R31: MetricSignature(2, 1),
    ChartSource.S31: MetricSignature(3, 1),
    ChartSource.H31: MetricSignature(2, 2),
    ChartSource.LIGHTCONE: AMBIENT,
}
# <x, x> on the model space (None: unconstrained)
SPACE_CONSTRAINT = {
    ChartSource.R31: None,
    ChartSource.S31: 1.0,
    ChartSource.H31: -1.0,
    ChartSource.LIGHTCONE: 0.0,
}


@dataclasses.dataclass(frozen=True)
class SurfaceChart:
    """A timelike surface in asymptotic coordinates (u, v)."""
    name: str
    source: ChartSource
    components: Tuple[Expression, ...]
    domain: Tuple[float, float, float, float]
    params: Mapping[str, float] = dataclasses.field(default_factory=dict)
    substitution: Optional[Tuple[Expression, Expression]] = None

    @property
    def signature(self) -> MetricSignature:
        return SPACE_SIGNATURES[self.source]

    def contains(self, u: float, v: float) -> bool:
        u0, u1, v0, v1 = self.domain
        return (u0 - _DOMAIN_SLACK <= u <= u1 + _DOMAIN_SLACK
                and v0 - _DOMAIN_SLACK <= v <= v1 + _DOMAIN_SLACK)

    def check_domain(self, u: float, v: float) -> None:
        if not self.contains(u, v):
            raise DomainError(f"point ({u:.6g}, {v:.6g}) outside domain {list(self.domain)} of {self.name}")

    def position_jets(self, u: float, v: float, order: int, flip_v: bool = False) -> List[Jet2]:
        """Jets of the chart components at (u, v); ``flip_v`` differentiates in w = -v."""
        self.check_domain(u, v)
        uj = Jet2.variable("u", u, order)
        vj = Jet2.linear(v, 0.0, -1.0, order) if flip_v else Jet2.variable("v", v, order)
        if self.substitution is not None:
            f, g = self.substitution
            uj, vj = _as_jet(f.evaluate(uj, vj, self.params), order), _as_jet(g.evaluate(uj, vj, self.params), order)
        return [_as_jet(c.evaluate(uj, vj, self.params), order) for c in self.components]

    def position_vector(self, u: float, v: float, order: int, flip_v: bool = False) -> JetVector:
        return JetVector.from_components(self.position_jets(u, v, order, flip_v), self.signature)

    def point(self, u: float, v: float) -> np.ndarray:
        self.check_domain(u, v)
        if self.substitution is not None:
            f, g = self.substitution
            u, v = float(f.evaluate(u, v, self.params)), float(g.evaluate(u, v, self.params))
        return np.array([float(c.evaluate(u, v, self.params)) for c in self.components])

    def reparametrized(self, f: str, g: str, domain: Sequence[float], name: Optional[str] = None) -> "SurfaceChart":
        """The chart x(f(u), g(v)) on ``domain``; f may use only u, g only v."""
        fe = parse_expression(f, self.params)
        ge = parse_expression(g, self.params)
        if "v" in fe.identifiers or "u" in ge.identifiers:
            raise ChartValidationError("reparametrization must be f(u), g(v)")
        if self.substitution is not None:
            raise ChartValidationError("chart is already reparametrized")
        return dataclasses.replace(
            self,
            name=name or f"{self.name}[u->{f}, v->{g}]",
            domain=tuple(float(x) for x in domain),
            substitution=(fe, ge),
        )

    def sample_points(self, n: int = 5) -> List[Tuple[float, float]]:
        u0, u1, v0, v1 = self.domain
        us = np.linspace(u0, u1, n + 2)[1:-1]
        vs = np.linspace(v0, v1, n + 2)[1:-1]
        return [(float(a), float(b)) for a in us for b in vs]


def _as_jet(value, order: int) -> Jet2:
    return value if isinstance(value, Jet2) else Jet2.constant(float(value), order)


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

_COMPONENT_COUNT = {ChartSource.R31: 3, ChartSource.S31: 4, ChartSource.H31: 4, ChartSource.LIGHTCONE: 5}


def parse_chart(config_text: str, param_overrides: Optional[Mapping[str, float]] = None,
                name: str = "user", validate: bool = True) -> SurfaceChart:
    """Build a chart from config text.

    Raises:
        ChartSyntaxError: malformed config or expression (with line/column).
        ChartValidationError: wrong component count, unknown catalog entry,
            space-form constraint or asymptotic check violated.
    """
    cfg = load_config_text(config_text)
    return chart_from_config(cfg, config_text, param_overrides, name, validate)


def chart_from_config(cfg: ChartConfig, config_text: str = "",
                      param_overrides: Optional[Mapping[str, float]] = None,
                      name: str = "user", validate: bool = True) -> SurfaceChart:
    params = {**cfg.params, **(param_overrides or {})}
    if cfg.catalog is not None:
        return catalog(cfg.catalog, params)

    expected = _COMPONENT_COUNT[cfg.source]
    if len(cfg.components) != expected:
        raise ChartValidationError(
            f"wrong component count: source {cfg.source.value} needs {expected}, got {len(cfg.components)}"
        )
    compiled = tuple(parse_expression(c, params, config_text or None) for c in cfg.components)
    domain = cfg.domain or (-1.0, 1.0, -1.0, 1.0)
    chart = SurfaceChart(name=name, source=cfg.source, components=compiled,
                         domain=tuple(domain), params=params)
    if validate:
        validate_chart(chart)
    return chart


def validate_chart(chart: SurfaceChart, eps_asym: float = EPS_ASYMPTOTIC,
                   eps_constraint: float = EPS_CONSTRAINT) -> None:
    """Check the space-form constraint and the asymptotic-coordinate condition at sample points."""
    target = SPACE_CONSTRAINT[chart.source]
    sig = chart.signature
    for u, v in chart.sample_points():
        x = PseudoVector(chart.point(u, v), sig)
        if target is not None:
            q = x.self_inner()
            if abs(q - target) > eps_constraint * max(1.0, x.sup_norm() ** 2):
                raise ChartValidationError(
                    f"space-form constraint <x,x> = {target:g} violated at ({u:.4g}, {v:.4g}): {q:.6g}"
                )
        defect = asymptotic_defect(chart, u, v)
        if defect > eps_asym:
            raise ChartValidationError(
                f"coordinates are not asymptotic at ({u:.4g}, {v:.4g}): defect {defect:.3g}"
            )


def asymptotic_defect(chart: SurfaceChart, u: float, v: float) -> float:
    """max(|<x_u,x_u>|, |<x_v,x_v>|) / (1 + |<x_u,x_v>|)."""
    x = chart.position_vector(u, v, 1)
    xu, xv = x.du().value, x.dv().value
    return max(abs(xu.self_inner()), abs(xv.self_inner())) / (1.0 + abs(xu.inner(xv)))


def catalog_text(name: str) -> str:
    if name not in CATALOG_NAMES:
        raise ChartValidationError(f"unknown catalog chart {name!r}; choose from {', '.join(CATALOG_NAMES)}")
    return resources.files("lightcone_geometry").joinpath("charts", f"{name}.toml").read_text(encoding="utf-8")


def catalog(name: str, params: Optional[Mapping[str, float]] = None,
            config_text: Optional[str] = None) -> SurfaceChart:
    """Closed-form charts by name; ``user`` takes ``config_text``."""
    if name == "user":
        if config_text is None:
            raise ChartValidationError("catalog entry 'user' needs a chart config")
        return parse_chart(config_text, params)
    text = catalog_text(name)
    cfg = load_config_text(text)
    return chart_from_config(cfg, text, params, name=name)


def list_catalog() -> List[Dict[str, object]]:
    rows = []
    for name in CATALOG_NAMES:
        cfg = load_config_text(catalog_text(name))
        rows.append({
            "name": name,
            "source": cfg.source.value,
            "components": list(cfg.components),
            "domain": list(cfg.domain or ()),
            "params": dict(cfg.params),
        })
    return rows


# ---------------------------------------------------------------------------
# Light-cone lift
# ---------------------------------------------------------------------------

def lift_components(source: ChartSource, x: Sequence):
    """Embed space-form coordinates into the light cone of R^5_2.

    R31 -> ((-1+<x,x>)/2, x, (1+<x,x>)/2); S31 -> (x, 1); H31 -> (1, x).
    Works for floats and jets.
    """
    sig = SPACE_SIGNATURES[source]
    if source is ChartSource.LIGHTCONE:
        return list(x)
    if source is ChartSource.R31:
        q = sum(xi * xi * float(s) for s, xi in zip(sig.diag, x))
        return [(q - 1.0) * 0.5, *x, (q + 1.0) * 0.5]
    one = x[0] * 0.0 + 1.0  # jet or float, matching x
    if source is ChartSource.S31:
        return [*x, one]
    return [one, *x]


def lift_to_lightcone(chart: SurfaceChart, u: float, v: float, order: int,
                      flip_v: bool = False) -> JetVector:
    """Null JetVector in R^5_2 representing the chart at (u, v).

    Raises:
        DomainError: (u, v) outside the chart domain.
    """
    comps = chart.position_jets(u, v, order, flip_v)
    return JetVector.from_components(lift_components(chart.source, comps), AMBIENT)


def lift_point(source: ChartSource, x: np.ndarray) -> PseudoVector:
    return PseudoVector(np.array(lift_components(source, [float(c) for c in x])), AMBIENT)


def normal_lift(source: ChartSource, x: np.ndarray, n: np.ndarray) -> PseudoVector:
    """Light-cone image of the space-form unit normal n at x."""
    sig = SPACE_SIGNATURES[source]
    if source is ChartSource.R31:
        xn = float(np.sum(sig.diag * x * n))
        return PseudoVector(np.array([xn, *n, xn]), AMBIENT)
    if source is ChartSource.S31:
        return PseudoVector(np.array([*n, 0.0]), AMBIENT)
    return PseudoVector(np.array([0.0, *n]), AMBIENT)


# ---------------------------------------------------------------------------
# Classical invariants in the space form
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class FundamentalForms:
    """Conformal factor, unit normal, Omega_i and mean curvature at a point."""
    omega: float
    n: PseudoVector
    Omega1: float
    Omega2: float
    H: float
    v_flipped: bool = False

    @property
    def exp2omega(self) -> float:
        return float(np.exp(2.0 * self.omega))


def _cofactor(rows: np.ndarray) -> np.ndarray:
    """Vector C with C . w = det[rows; w]."""
    d = rows.shape[1]
    out = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        out[i] = np.linalg.det(np.vstack([rows, e]))
    return out


def space_normal(source: ChartSource, x: np.ndarray, xu: np.ndarray, xv: np.ndarray) -> PseudoVector:
    """Unit normal: G (x_v x x_u) in R31, cofactor of (x_u, x_v, x) in S31/H31."""
    sig = SPACE_SIGNATURES[source]
    if source is ChartSource.R31:
        raw = _cofactor(np.vstack([xv, xu]))
    else:
        raw = _cofactor(np.vstack([xu, xv, x]))
    n = PseudoVector(sig.diag * raw, sig)
    q = n.self_inner()
    if q <= 0:
        raise DegenerateConformalFactorError("degenerate/causal-type change: normal is not spacelike")
    return n / np.sqrt(q)


def fundamental_forms(chart: SurfaceChart, u: float, v: float) -> FundamentalForms:
    """omega, n, Omega_1, Omega_2 and H from the space-form structure equations.

    Raises:
        DegenerateConformalFactorError: e^{2 omega} = 2<x_u, x_v> vanishes.
    """
    if chart.source is ChartSource.LIGHTCONE:
        raise ChartValidationError("fundamental forms need a space-form chart")
    flip = False
    x = chart.position_vector(u, v, 2)
    if x.du().value.inner(x.dv().value) < 0:
        flip = True
        x = chart.position_vector(u, v, 2, flip_v=True)
    xu, xv = x.du(), x.dv()
    e2w = 2.0 * xu.value.inner(xv.value)
    if e2w <= EPS_CONFORMAL:
        raise DegenerateConformalFactorError("degenerate/causal-type change")
    n = space_normal(chart.source, x.value.coords, xu.value.coords, xv.value.coords)
    xuu, xvv, xuv = xu.du().value, xv.dv().value, xu.dv().value
    return FundamentalForms(
        omega=0.5 * float(np.log(e2w)),
        n=n,
        Omega1=xuu.inner(n),
        Omega2=xvv.inner(n),
        H=2.0 * xuv.inner(n) / e2w,
        v_flipped=flip,
    )
