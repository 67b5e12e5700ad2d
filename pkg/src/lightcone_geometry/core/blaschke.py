"""Blaschke pairs: a second envelope Yhat of the mean curvature sphere congruence.

A pair is given by scalar fields a, b and a normal field xi through

    Yhat = N + 2a Y_u + 2b Y_v + (2ab + <xi,xi>/2) Y + xi

and is measured by

    rho1   = 2a_u - 2<k1,k2> + <xi,xi>/2      rho2   = 2b_v - 2<k1,k2> + <xi,xi>/2
    theta1 = 2b_u - 2b^2 - s1 - 2<xi,k1>      theta2 = 2a_v - 2a^2 - s2 - 2<xi,k2>
    eta1   = D_u xi - b xi + 2 D_v k1 + 2a k1  eta2   = D_v xi - a xi + 2 D_u k2 + 2b k2

Constructors here produce pairs from expressions, from the dual of an
S-Willmore surface, by integrating the Darboux system and from a constant
point; ``classify`` sorts a pair into its case.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from ..config import DEFAULT_JET_ORDER, PairMode, Tolerances
from ..errors import PolarHyperplaneError, UmbilicError
from .catalog import SurfaceChart
from .expressions import parse_expression
from .frame import ConformalFrame, frame_at
from .grid import Grid, diff4, field, sweep
from .jets import Jet2, JetVector
from .pseudo_linear import PseudoVector, wedge_defect

logger = logging.getLogger(__name__)

DARBOUX_SAMPLE_ORDER = 8


class PairLabel(str, Enum):
    DUAL_SWILLMORE = "DualSWillmore"
    ISOTHERMIC_DARBOUX = "IsothermicDarboux"
    TRIVIAL = "Trivial"
    NOT_ENVELOPE = "NotEnvelope"
    INDETERMINATE = "Indeterminate"


# ---------------------------------------------------------------------------
# Per-point kernel
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class PairPoint:
    """Pair quantities at one grid point; NaN where the jet order ran out."""
    u: float
    v: float
    a: float
    b: float
    zeta: float
    rho1: float
    rho2: float
    theta1: float
    theta2: float
    eta1: float
    eta2: float
    xi_norm: float
    expansion: float
    envelope: float
    theta_xi_balance: float
    theta1_v: float = math.nan
    theta2_u: float = math.nan
    kappa_hat1: float = math.nan
    kappa_hat2: float = math.nan
    fixed_direction: float = math.nan
    point_sphere: float = math.nan
    symmetry: float = math.nan
    Y: Tuple[float, ...] = ()
    Yhat: Tuple[float, ...] = ()

    def as_row(self) -> Dict[str, float]:
        row = {k: v for k, v in dataclasses.asdict(self).items() if k not in ("Y", "Yhat")}
        row.update({f"Yhat{i}": c for i, c in enumerate(self.Yhat)})
        return row


def _sup(w: JetVector) -> float:
    return w.value.sup_norm()


def _dv_or_nan(x: Jet2) -> float:
    return x.dv().value if x.order >= 1 else math.nan


def _du_or_nan(x: Jet2) -> float:
    return x.du().value if x.order >= 1 else math.nan


def pair_point(frame: ConformalFrame, a: Jet2, b: Jet2, xi: JetVector,
               darboux: Optional[Tuple[float, int]] = None) -> PairPoint:
    """Evaluate the pair (a, b, xi) over ``frame``; field jets need order >= 1."""
    Y, Yu, Yv, N = frame.Y, frame.Y_u, frame.Y_v, frame.N
    k1, k2, s1, s2 = frame.kappa1, frame.kappa2, frame.s1, frame.s2
    kk = frame.kk
    xx = xi.inner(xi)

    rho1 = a.du() * 2.0 - kk * 2.0 + xx * 0.5
    rho2 = b.dv() * 2.0 - kk * 2.0 + xx * 0.5
    theta1 = b.du() * 2.0 - b * b * 2.0 - s1 - xi.inner(k1) * 2.0
    theta2 = a.dv() * 2.0 - a * a * 2.0 - s2 - xi.inner(k2) * 2.0
    Dvk1, Duk2 = frame.D_v(k1), frame.D_u(k2)
    eta1 = frame.D_u(xi) - xi * b + Dvk1 * 2.0 + k1 * (a * 2.0)
    eta2 = frame.D_v(xi) - xi * a + Duk2 * 2.0 + k2 * (b * 2.0)

    Yhat = N + Yu * (a * 2.0) + Yv * (b * 2.0) + Y * (a * b * 2.0 + xx * 0.5) + xi
    envelope = abs(Y.inner(Yhat).value + 1.0)

    values = dict(
        u=frame.point[0], v=frame.point[1],
        a=a.value, b=b.value, zeta=frame.components(xi)[0].value if frame.E else 0.0,
        rho1=rho1.value, rho2=rho2.value, theta1=theta1.value, theta2=theta2.value,
        eta1=frame.normal_norm(eta1), eta2=frame.normal_norm(eta2),
        xi_norm=frame.normal_norm(xi), envelope=envelope,
        Y=tuple(Y.value.coords.tolist()), Yhat=tuple(Yhat.value.coords.tolist()),
    )

    # derivative expansion of Yhat
    if Yhat.order >= 1:
        Yhat_u = Yhat.du()
        Yhat_v = Yhat.dv()
        exp_u = Yhat_u - (Yhat * b + (Yu + Y * b) * rho1 + (Yv + Y * a) * theta1 + eta1 + Y * xi.inner(eta1))
        exp_v = Yhat_v - (Yhat * a + (Yu + Y * b) * theta2 + (Yv + Y * a) * rho2 + eta2 + Y * xi.inner(eta2))
        values["expansion"] = max(_sup(exp_u), _sup(exp_v))

        # trivial-case witnesses
        values["point_sphere"] = max(_sup(Yhat_u - Yhat * b), _sup(Yhat_v - Yhat * a))
        if abs(rho1.value) > 1e-12:
            Z = Yhat / rho1 - Y
            if Z.order >= 1:
                scale = max(1.0, _sup(Z))
                values["fixed_direction"] = max(_sup(Z.du() + Z * b), _sup(Z.dv() + Z * a)) / scale

        if darboux is not None:
            theta, sign = darboux
            sym_v = Yv + Y * a - (Yhat_u - Yhat * b) * (1.0 / theta)
            sym_u = Yu + Y * b - (Yhat_v - Yhat * a) * (float(sign) / theta)
            values["symmetry"] = max(_sup(sym_v), _sup(sym_u))
    else:
        values["expansion"] = math.nan

    balance = xi * (a.du() * 0.5) - k2 * (theta1 * 0.5) - xi * (b.dv() * 0.5) + k1 * (theta2 * 0.5)
    values["theta_xi_balance"] = frame.normal_norm(balance)
    if theta1.order >= 1 and rho2.order >= 1:
        values["theta1_v"] = abs(_dv_or_nan(theta1) - _du_or_nan(rho2) + 2.0 * b.value * rho2.value)
        values["theta2_u"] = abs(_du_or_nan(theta2) - _dv_or_nan(rho1) + 2.0 * a.value * rho1.value)

    # dual-case witness: normal part of Yhat_uu against rho_i kappa_i
    if Yhat.order >= 2:
        for idx, (second, rho, kappa) in enumerate(
            ((Yhat.du().du(), rho1, k1), (Yhat.dv().dv(), rho2, k2)), start=1
        ):
            kq = kappa.inner(kappa).value
            if abs(kq) > 1e-24:
                kappa_hat = frame.normal_part(second)
                ratio = kappa_hat.inner(kappa).value / kq
                values[f"kappa_hat{idx}"] = abs(ratio - rho.value)
    return PairPoint(**values)


# ---------------------------------------------------------------------------
# PairData
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class PairData:
    """A Blaschke pair sampled on a grid."""
    chart: SurfaceChart
    grid: Grid
    mode: PairMode
    points: List[List[PairPoint]]
    theta: Optional[float] = None
    sign: Optional[int] = None
    compatibility: Optional[float] = None
    blowup: bool = False
    v_flipped: bool = False
    notes: List[str] = dataclasses.field(default_factory=list)

    def field(self, name: str) -> np.ndarray:
        return field(self.points, lambda p: getattr(p, name))

    def sup(self, name: str) -> float:
        values = np.abs(self.field(name))
        if np.all(np.isnan(values)):
            return math.nan
        return float(np.nanmax(values))

    def rows(self) -> List[Dict[str, float]]:
        return [p.as_row() for row in self.points for p in row]


def _field_jet(expr, u: float, v: float, order: int, flipped: bool, params) -> Jet2:
    uj = Jet2.variable("u", u, order)
    vj = Jet2.linear(v, 0.0, -1.0, order) if flipped else Jet2.variable("v", v, order)
    value = expr.evaluate(uj, vj, params)
    return value if isinstance(value, Jet2) else Jet2.constant(float(value), order)


def _normal_field(frame: ConformalFrame, zeta: Jet2) -> JetVector:
    if not frame.E:
        return frame.Y * 0.0
    return frame.E[0] * zeta


def build_pair(chart: SurfaceChart, a_field: str, b_field: str, xi_field: str, grid: Grid,
               order: int = DEFAULT_JET_ORDER, tolerances: Optional[Tolerances] = None,
               workers: int = 4) -> PairData:
    """Pair from closed-form fields; ``xi_field`` is the E-component of xi.

    Raises:
        ChartSyntaxError: a field expression does not parse.
    """
    tol = tolerances or Tolerances()
    exprs = [parse_expression(text, chart.params) for text in (a_field, b_field, xi_field)]

    def kernel(u: float, v: float) -> PairPoint:
        frame = frame_at(chart, u, v, order, tol)
        a, b, zeta = (_field_jet(e, u, v, order, frame.v_flipped, chart.params) for e in exprs)
        return pair_point(frame, a, b, _normal_field(frame, zeta))

    points = sweep(kernel, grid, workers)
    return PairData(chart=chart, grid=grid, mode=PairMode.FIELDS, points=points)


def dual_pair(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
              tolerances: Optional[Tolerances] = None, workers: int = 4) -> PairData:
    """a = -k1_v / k1, b = -k2_u / k2, xi = 0.

    Raises:
        UmbilicError: k1 or k2 vanishes at grid points (listed).
    """
    tol = tolerances or Tolerances()

    def kernel(u: float, v: float):
        frame = frame_at(chart, u, v, order, tol)
        k1, k2 = frame.k1, frame.k2
        threshold = tol.umbilic * max(1.0, frame.Y.sup_norm())
        if abs(k1.value) < threshold or abs(k2.value) < threshold:
            return (u, v)
        a = -k1.dv() / k1
        b = -k2.du() / k2
        return pair_point(frame, a, b, _normal_field(frame, Jet2.constant(0.0, a.order)))

    points = sweep(kernel, grid, workers)
    umbilic = [p for row in points for p in row if isinstance(p, tuple)]
    if umbilic:
        raise UmbilicError(f"umbilic points inside grid: {len(umbilic)}", umbilic)
    return PairData(chart=chart, grid=grid, mode=PairMode.DUAL, points=points)


def trivial_from_point(chart: SurfaceChart, P: Sequence[float], grid: Grid,
                       order: int = DEFAULT_JET_ORDER, tolerances: Optional[Tolerances] = None,
                       workers: int = 4) -> PairData:
    """Pair whose second envelope is the constant point P.

    Raises:
        PolarHyperplaneError: P is not null, or <Y, P> vanishes at a grid point.
    """
    tol = tolerances or Tolerances()
    point = PseudoVector(np.asarray(P, dtype=float))
    if not point.is_null(tol.null):
        raise PolarHyperplaneError(f"precondition failed: P must be null, <P,P> = {point.self_inner():.3g}")

    def kernel(u: float, v: float) -> PairPoint:
        frame = frame_at(chart, u, v, order, tol)
        Pj = JetVector.constant(point, frame.Y.order, point.signature)
        beta = -frame.Y.inner(Pj)
        if abs(beta.value) <= tol.pivot * max(1.0, point.sup_norm()):
            raise PolarHyperplaneError(f"base point on polar hyperplane at ({u:.4g}, {v:.4g})")
        a = Pj.inner(frame.Y_v) / beta
        b = Pj.inner(frame.Y_u) / beta
        xi = frame.normal_part(Pj) / beta
        return pair_point(frame, a, b, xi)

    points = sweep(kernel, grid, workers)
    pair = PairData(chart=chart, grid=grid, mode=PairMode.TRIVIAL_POINT, points=points)
    spread = max(wedge_defect(np.array(p.Yhat), point.coords) for row in points for p in row)
    pair.notes.append(f"projective constancy of Yhat: {spread:.3e}")
    return pair


# ---------------------------------------------------------------------------
# Darboux integration
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class _Coefficients:
    """Frame scalars entering the Darboux system, as jets at a grid point."""
    kk: Jet2
    s1: Jet2
    s2: Jet2
    k1: Jet2
    k2: Jet2
    k1_v: Jet2
    k2_u: Jet2

    def at(self, du: float, dv: float) -> Tuple[float, ...]:
        return tuple(j.at(du, dv) for j in (self.kk, self.s1, self.s2, self.k1, self.k2, self.k1_v, self.k2_u))


def _coefficients(frame: ConformalFrame) -> _Coefficients:
    k1, k2 = frame.k1, frame.k2
    return _Coefficients(frame.kk, frame.s1, frame.s2, k1, k2, k1.dv(), k2.du())


def _rhs_u(state: np.ndarray, c: Tuple[float, ...], theta: float) -> np.ndarray:
    a, b, z = state
    kk, s1, _, k1, _, k1_v, _ = c
    return np.array([
        kk - 0.25 * z * z,
        0.5 * (theta + 2.0 * b * b + s1 + 2.0 * z * k1),
        b * z - 2.0 * k1_v - 2.0 * a * k1,
    ])


def _rhs_v(state: np.ndarray, c: Tuple[float, ...], theta2: float) -> np.ndarray:
    a, b, z = state
    kk, _, s2, _, k2, _, k2_u = c
    return np.array([
        0.5 * (theta2 + 2.0 * a * a + s2 + 2.0 * z * k2),
        kk - 0.25 * z * z,
        a * z - 2.0 * k2_u - 2.0 * b * k2,
    ])


class _Integrator:
    """Classical RK4 along grid lines; frame coefficients at half steps come from the jets."""

    def __init__(self, coeffs: List[List[_Coefficients]], grid: Grid, theta: float, sign: int,
                 vsign: float, bound: float):
        self.coeffs = coeffs
        self.grid = grid
        self.theta = theta
        self.theta2 = sign * theta
        self.vsign = vsign
        self.bound = bound

    def step_u(self, y: np.ndarray, i: int, j: int, h: float) -> np.ndarray:
        c = self.coeffs[i][j]
        f = lambda y_, du: _rhs_u(y_, c.at(du, 0.0), self.theta)
        k1 = f(y, 0.0)
        k2 = f(y + 0.5 * h * k1, 0.5 * h)
        k3 = f(y + 0.5 * h * k2, 0.5 * h)
        k4 = f(y + h * k3, h)
        return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def step_v(self, y: np.ndarray, i: int, j: int, h: float) -> np.ndarray:
        # the frame differentiates in w = vsign * v
        c = self.coeffs[i][j]
        s = self.vsign
        f = lambda y_, dv: s * _rhs_v(y_, c.at(0.0, s * dv), self.theta2)
        k1 = f(y, 0.0)
        k2 = f(y + 0.5 * h * k1, 0.5 * h)
        k3 = f(y + 0.5 * h * k2, 0.5 * h)
        k4 = f(y + h * k3, h)
        return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def _ok(self, y: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(y))) and float(np.sum(np.abs(y))) <= self.bound

    def run(self, init: np.ndarray, order: str) -> Tuple[np.ndarray, bool]:
        """Integrate ``uv`` (u along v0, then v) or ``vu``; returns (nu, nv, 3) and a blow-up flag."""
        nu, nv = self.grid.nu, self.grid.nv
        hu, hv = self.grid.hu, self.grid.hv
        out = np.full((nu, nv, 3), np.nan)
        out[0, 0] = init
        blown = False
        if order == "uv":
            for i in range(nu - 1):
                if not np.isfinite(out[i, 0]).all():
                    break
                y = self.step_u(out[i, 0], i, 0, hu)
                if not self._ok(y):
                    blown = True
                    break
                out[i + 1, 0] = y
            for i in range(nu):
                for j in range(nv - 1):
                    if not np.isfinite(out[i, j]).all():
                        break
                    y = self.step_v(out[i, j], i, j, hv)
                    if not self._ok(y):
                        blown = True
                        break
                    out[i, j + 1] = y
        else:
            for j in range(nv - 1):
                if not np.isfinite(out[0, j]).all():
                    break
                y = self.step_v(out[0, j], 0, j, hv)
                if not self._ok(y):
                    blown = True
                    break
                out[0, j + 1] = y
            for j in range(nv):
                for i in range(nu - 1):
                    if not np.isfinite(out[i, j]).all():
                        break
                    y = self.step_u(out[i, j], i, j, hu)
                    if not self._ok(y):
                        blown = True
                        break
                    out[i + 1, j] = y
        return out, blown


def darboux_integrate(chart: SurfaceChart, theta: float, init: Sequence[float], grid: Grid,
                      order: int = DEFAULT_JET_ORDER, tolerances: Optional[Tolerances] = None,
                      workers: int = 4, sign: Optional[int] = None) -> PairData:
    """Integrate the Darboux system with spectral parameter ``theta`` from (a0, b0, zeta0) at (u0, v0).

    Both sweep orders run concurrently; ``compatibility`` is their sup difference.
    The pair is read off the u-then-v sweep with a, b, zeta derivatives taken by
    fourth-order grid differences, so rho, theta and eta measure the integration.
    ``sign`` (+1/-1) sets theta2 = sign * theta; by default it is the sign of k1 k2 at (u0, v0).
    """
    tol = tolerances or Tolerances()
    sample_order = max(order, DARBOUX_SAMPLE_ORDER)
    frames: List[List[ConformalFrame]] = sweep(
        lambda u, v: frame_at(chart, u, v, sample_order, tol), grid, workers
    )
    coeffs = [[_coefficients(f) for f in row] for row in frames]
    flips = {f.v_flipped for row in frames for f in row}
    if len(flips) > 1:
        logger.warning("v-flip is not uniform on the grid; Darboux sweep uses the flag at (u0, v0)")
    vsign = -1.0 if frames[0][0].v_flipped else 1.0
    if sign is None:
        c0 = coeffs[0][0]
        sign = 1 if c0.k1.value * c0.k2.value >= 0 else -1

    integrator = _Integrator(coeffs, grid, float(theta), int(sign), vsign, tol.blowup)
    y0 = np.asarray(init, dtype=float)
    with ThreadPoolExecutor(max_workers=2) as pool:
        uv_future = pool.submit(integrator.run, y0, "uv")
        vu_future = pool.submit(integrator.run, y0, "vu")
        uv, uv_blown = uv_future.result()
        vu, vu_blown = vu_future.result()

    both = np.isfinite(uv).all(axis=2) & np.isfinite(vu).all(axis=2)
    compatibility = float(np.max(np.abs(uv - vu)[both])) if both.any() else math.nan
    blown = uv_blown or vu_blown
    pair = PairData(chart=chart, grid=grid, mode=PairMode.DARBOUX, points=[],
                    theta=float(theta), sign=int(sign), compatibility=compatibility, blowup=blown,
                    v_flipped=vsign < 0)
    if blown:
        valid = int(np.isfinite(uv).all(axis=2).sum())
        logger.warning("Darboux transform left the bound %.3g; %d of %d grid points integrated",
                       tol.blowup, valid, grid.nu * grid.nv)
        pair.notes.append(f"blow-up: {valid} of {grid.nu * grid.nv} grid points integrated")

    theta2 = sign * float(theta)
    du_grid, dw_grid = _sweep_derivatives(uv, grid, vsign)
    if du_grid is None:
        logger.warning("grid %dx%d too small to difference; a, b, zeta derivatives taken from the system",
                       grid.nu, grid.nv)
        pair.notes.append("derivatives from the Darboux system, not the integrated grid")
    points: List[List[PairPoint]] = []
    for i, row in enumerate(frames):
        out_row = []
        for j, frame in enumerate(row):
            state = uv[i, j]
            if du_grid is not None:
                du, dw = du_grid[i, j], dw_grid[i, j]
            elif np.isfinite(state).all():
                c = coeffs[i][j].at(0.0, 0.0)
                du, dw = _rhs_u(state, c, float(theta)), _rhs_v(state, c, theta2)
            else:
                du = dw = state
            if not (np.isfinite(state).all() and np.isfinite(du).all() and np.isfinite(dw).all()):
                out_row.append(_empty_point(frame))
                continue
            a = Jet2.linear(state[0], du[0], dw[0], 1)
            b = Jet2.linear(state[1], du[1], dw[1], 1)
            zeta = Jet2.linear(state[2], du[2], dw[2], 1)
            out_row.append(pair_point(frame, a, b, _normal_field(frame, zeta),
                                      darboux=(float(theta), int(sign)) if theta != 0 else None))
        points.append(out_row)
    pair.points = points
    _attach_grid_identities(pair)
    return pair


def _sweep_derivatives(uv: np.ndarray, grid: Grid,
                       vsign: float) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """d/du and d/dw of the uv-sweep fields by grid differences; (None, None) below 3 points per axis."""
    if grid.nu < 3 or grid.nv < 3:
        return None, None

    def d(axis: int, h: float) -> np.ndarray:
        if uv.shape[axis] >= 5:
            return diff4(uv, h, axis=axis)
        return np.gradient(uv, h, axis=axis, edge_order=2)

    return d(0, grid.hu), d(1, grid.hv) * vsign


def _empty_point(frame: ConformalFrame) -> PairPoint:
    nan = math.nan
    return PairPoint(
        u=frame.point[0], v=frame.point[1], a=nan, b=nan, zeta=nan,
        rho1=nan, rho2=nan, theta1=nan, theta2=nan, eta1=nan, eta2=nan,
        xi_norm=nan, expansion=nan, envelope=nan, theta_xi_balance=nan,
    )


def _attach_grid_identities(pair: PairData) -> None:
    """theta1_v and theta2_u identities by grid differences where the field jets are first order."""
    g = pair.grid
    if g.nu < 5 or g.nv < 5:
        return
    a, b = pair.field("a"), pair.field("b")
    rho1, rho2 = pair.field("rho1"), pair.field("rho2")
    theta1, theta2 = pair.field("theta1"), pair.field("theta2")
    vsign = -1.0 if pair.v_flipped else 1.0
    id1 = np.abs(diff4(theta1, g.hv, axis=1) * vsign - diff4(rho2, g.hu, axis=0) + 2.0 * b * rho2)
    id2 = np.abs(diff4(theta2, g.hu, axis=0) - diff4(rho1, g.hv, axis=1) * vsign + 2.0 * a * rho1)
    pair.points = [
        [dataclasses.replace(p, theta1_v=float(id1[i, j]), theta2_u=float(id2[i, j])) for j, p in enumerate(row)]
        for i, row in enumerate(pair.points)
    ]


def darboux_symmetry_residual(pair: PairData) -> float:
    """sup |Y_v + aY - (Yhat_u - b Yhat)/theta|, |Y_u + bY - sign (Yhat_v - a Yhat)/theta| over the pair."""
    if pair.theta is None or pair.theta == 0:
        raise ValueError("symmetry residual needs a Darboux pair with theta != 0")
    return pair.sup("symmetry")


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

class PairClassification(BaseModel):
    label: PairLabel
    residuals: Dict[str, float]
    witness: Dict[str, object] = {}

    @property
    def negative(self) -> bool:
        return self.label in (PairLabel.NOT_ENVELOPE, PairLabel.INDETERMINATE)

    def __str__(self) -> str:
        parts = ", ".join(f"{k}={v:.3e}" for k, v in self.residuals.items() if isinstance(v, float))
        return f"{self.label.value} | {parts}"


def _nan_safe(x: float) -> float:
    return 0.0 if math.isnan(x) else x


def classify(pair: PairData, tolerances: Optional[Tolerances] = None) -> PairClassification:
    """Sort a pair into NotEnvelope, DualSWillmore, Trivial, IsothermicDarboux or Indeterminate."""
    tol = tolerances or Tolerances()
    tau = tol.classify
    eta = max(pair.sup("eta1"), pair.sup("eta2"))
    theta = max(pair.sup("theta1"), pair.sup("theta2"))
    rho = max(pair.sup("rho1"), pair.sup("rho2"))
    xi = pair.sup("xi_norm")
    residuals = {
        "eta": eta,
        "theta": theta,
        "rho": rho,
        "xi": xi,
        "expansion": pair.sup("expansion"),
        "envelope": pair.sup("envelope"),
        "theta_xi_balance": pair.sup("theta_xi_balance"),
        "theta1_v": pair.sup("theta1_v"),
        "theta2_u": pair.sup("theta2_u"),
    }
    if pair.compatibility is not None:
        residuals["compatibility"] = pair.compatibility
    witness: Dict[str, object] = {}
    balance = residuals["theta_xi_balance"]
    compatible = pair.compatibility is None or pair.compatibility <= tol.compatibility

    if not compatible:
        # NaN compatibility lands here too: the sweeps share no finite point
        label = PairLabel.INDETERMINATE
        witness["failed"] = "compatibility"
        witness["compatibility"] = pair.compatibility
    elif math.isnan(eta) or eta > tau:
        label = PairLabel.NOT_ENVELOPE
    elif balance > tau:
        label = PairLabel.INDETERMINATE
        witness["failed"] = "theta_xi_balance"
        witness["theta_xi_balance"] = balance
    elif theta <= tau and xi <= tau:
        label = PairLabel.DUAL_SWILLMORE
        witness["kappa_hat1_defect"] = _nan_safe(pair.sup("kappa_hat1"))
        witness["kappa_hat2_defect"] = _nan_safe(pair.sup("kappa_hat2"))
        witness["rho1_mean"] = float(np.nanmean(pair.field("rho1")))
    elif theta <= tau:
        label = PairLabel.TRIVIAL
        rho1, rho2 = pair.field("rho1"), pair.field("rho2")
        witness["rho1_minus_rho2"] = float(np.nanmax(np.abs(rho1 - rho2)))
        if rho <= tau:
            witness["stratum"] = "point_sphere"
            witness["fixed_direction"] = _nan_safe(pair.sup("point_sphere"))
        else:
            witness["stratum"] = "fixed_direction"
            witness["fixed_direction"] = _nan_safe(pair.sup("fixed_direction"))
        witness["fixed_direction_ok"] = witness["fixed_direction"] <= tol.fixed_direction
    elif rho <= tau:
        label = PairLabel.ISOTHERMIC_DARBOUX
        witness["theta1_mean"] = float(np.nanmean(pair.field("theta1")))
        witness["theta2_mean"] = float(np.nanmean(pair.field("theta2")))
    else:
        label = PairLabel.INDETERMINATE
    logger.info("pair on %s classified %s", pair.chart.name, label.value)
    return PairClassification(label=label, residuals=residuals, witness=witness)
