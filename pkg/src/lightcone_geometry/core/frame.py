"""Canonical lift, moving frame and the residuals of its structure equations.

Everything here is jet arithmetic at a single base point (u, v).  The frame
is built from the canonical lift Y in closed form:

    N  = 2 Y_uv + 2 <Y_uv, Y_uv> Y
    s1 = 2 <Y_uu, N>,        kappa1 = Y_uu + (s1/2) Y
    s2 = 2 <Y_vv, N>,        kappa2 = Y_vv + (s2/2) Y

and the normal connection is D_w psi := normal part of d_w psi.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from ..config import DEFAULT_JET_ORDER, ChartSource, Tolerances
from ..errors import DegenerateConformalFactorError, InvalidFrameError
from .catalog import SurfaceChart, fundamental_forms, lift_to_lightcone, normal_lift
from .jets import Jet2, JetVector
from .pseudo_linear import (
    TangentFrame,
    gram_schmidt_indefinite,
    split_tangent,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Canonical lift
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class CanonicalLift:
    Y: JetVector
    scale: Jet2
    v_flipped: bool


def _canonical_lift(chart: SurfaceChart, u: float, v: float, order: int,
                    tol: Tolerances) -> CanonicalLift:
    phi = lift_to_lightcone(chart, u, v, order)
    q = phi.du().inner(phi.dv())
    flipped = False
    if q.value < 0:
        flipped = True
        phi = lift_to_lightcone(chart, u, v, order, flip_v=True)
        q = phi.du().inner(phi.dv())
        logger.info("v-flip applied for %s at (%.4g, %.4g)", chart.name, u, v)
    if abs(q.value) <= tol.jet * max(1.0, phi.sup_norm() ** 2):
        raise DegenerateConformalFactorError()
    scale = (q * 2.0) ** -0.5
    return CanonicalLift(phi * scale, scale, flipped)


def canonical_lift(chart: SurfaceChart, u: float, v: float, order: int = DEFAULT_JET_ORDER,
                   tolerances: Optional[Tolerances] = None) -> JetVector:
    """Light-cone lift rescaled so that <Y_u, Y_v> = 1/2.

    ``order`` is the chart jet order; the lift comes back one order lower.

    Raises:
        DegenerateConformalFactorError: <lift_u, lift_v> vanishes at (u, v).
    """
    return _canonical_lift(chart, u, v, order, tolerances or Tolerances()).Y


# ---------------------------------------------------------------------------
# Frame
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ConformalFrame:
    """Y, Y_u, Y_v, N, kappa_i, s_i and a normal basis E at one point."""
    Y: JetVector
    Y_u: JetVector
    Y_v: JetVector
    N: JetVector
    kappa1: JetVector
    kappa2: JetVector
    s1: Jet2
    s2: Jet2
    E: List[JetVector]
    signs: List[int]
    d_conn: Dict[Tuple[int, int, str], Jet2]
    scale: Jet2
    v_flipped: bool = False
    point: Tuple[float, float] = (0.0, 0.0)

    def tangent_frame(self) -> TangentFrame:
        return TangentFrame(self.Y, self.Y_u, self.Y_v, self.N)

    def normal_part(self, w: JetVector) -> JetVector:
        return split_tangent(self.tangent_frame(), w)[1]

    def D_u(self, psi: JetVector) -> JetVector:
        return self.normal_part(psi.du())

    def D_v(self, psi: JetVector) -> JetVector:
        return self.normal_part(psi.dv())

    def components(self, psi: JetVector) -> List[Jet2]:
        """Coordinates of a normal section in the basis E."""
        return [psi.inner(e) * float(s) for e, s in zip(self.E, self.signs)]

    def normal_norm(self, psi: JetVector) -> float:
        """Positive-definite norm on V^perp (|E-component| when the normal bundle has rank 1)."""
        return float(np.sqrt(sum(c.value ** 2 for c in self.components(psi))))

    @property
    def k1(self) -> Jet2:
        return self.components(self.kappa1)[0]

    @property
    def k2(self) -> Jet2:
        return self.components(self.kappa2)[0]

    @property
    def kk(self) -> Jet2:
        """<kappa1, kappa2>."""
        return self.kappa1.inner(self.kappa2)

    def summary(self) -> Dict[str, float]:
        return {
            "s1": self.s1.value,
            "s2": self.s2.value,
            "k1": self.k1.value,
            "k2": self.k2.value,
            "kappa1.kappa2": self.kk.value,
            "kappa1.kappa1": self.kappa1.inner(self.kappa1).value,
            "lambda": self.scale.value,
            "v_flipped": float(self.v_flipped),
        }


def _normal_basis(Y, Yu, Yv, N, tol: Tolerances) -> Tuple[List[JetVector], List[int]]:
    frame = TangentFrame(Y, Yu, Yv, N)
    sig = Y.signature
    candidates = [
        split_tangent(frame, JetVector.constant(np.eye(sig.dimension)[k], N.order, sig))[1]
        for k in range(sig.dimension)
    ]
    basis = gram_schmidt_indefinite(candidates, tol.pivot, keep=sig.dimension - 4)
    return list(basis.vectors), list(basis.signs)


def _orient(chart: SurfaceChart, u: float, v: float, E: List[JetVector]) -> List[JetVector]:
    """Align E[0] with the light-cone image of the space-form normal."""
    if not E:
        return E
    e0 = E[0].value.coords
    if chart.source is ChartSource.LIGHTCONE:
        lead = e0[np.argmax(np.abs(e0) > 1e-12)]
        sign = 1.0 if lead >= 0 else -1.0
    else:
        forms = fundamental_forms(chart, u, v)
        n_lift = normal_lift(chart.source, chart.point(u, v), forms.n.coords)
        sign = 1.0 if E[0].value.inner(n_lift) >= 0 else -1.0
    if sign > 0:
        return E
    return [-E[0], *E[1:]]


def frame_at(chart: SurfaceChart, u: float, v: float, order: int = DEFAULT_JET_ORDER,
             tolerances: Optional[Tolerances] = None) -> ConformalFrame:
    """The conformal frame of ``chart`` at (u, v) with jets of chart order ``order``.

    Raises:
        DegenerateConformalFactorError: no canonical lift at (u, v).
        DegenerateSubspaceError: V^perp basis cannot be normalized.
        InvalidFrameError: normalization relations fail beyond ``tolerances.frame``.
    """
    tol = tolerances or Tolerances()
    lift = _canonical_lift(chart, u, v, order, tol)
    Y = lift.Y
    Yu, Yv = Y.du(), Y.dv()
    Yuu, Yvv, Yuv = Yu.du(), Yv.dv(), Yu.dv()
    N = Yuv * 2.0 + Y * (Yuv.inner(Yuv) * 2.0)
    s1 = Yuu.inner(N) * 2.0
    s2 = Yvv.inner(N) * 2.0
    kappa1 = Yuu + Y * (s1 * 0.5)
    kappa2 = Yvv + Y * (s2 * 0.5)

    E, signs = _normal_basis(Y, Yu, Yv, N, tol)
    E = _orient(chart, u, v, E)
    frame_tf = TangentFrame(Y, Yu, Yv, N)
    d_conn: Dict[Tuple[int, int, str], Jet2] = {}
    for b, e_b in enumerate(E):
        for direction, d in (("u", e_b.du()), ("v", e_b.dv())):
            normal = split_tangent(frame_tf, d)[1]
            for a, (e_a, s_a) in enumerate(zip(E, signs)):
                d_conn[(a, b, direction)] = normal.inner(e_a) * float(s_a)

    frame = ConformalFrame(
        Y=Y, Y_u=Yu, Y_v=Yv, N=N,
        kappa1=kappa1, kappa2=kappa2, s1=s1, s2=s2,
        E=E, signs=signs, d_conn=d_conn,
        scale=lift.scale, v_flipped=lift.v_flipped, point=(float(u), float(v)),
    )
    residuals = normalization_residuals(frame)
    worst = max(residuals, key=residuals.get)
    scale = max(1.0, Y.sup_norm() ** 2)
    if residuals[worst] > tol.frame * scale:
        raise InvalidFrameError(f"invalid frame: {worst} residual {residuals[worst]:.3g}")
    return frame


def normalization_residuals(frame: ConformalFrame) -> Dict[str, float]:
    """|relation - target| for the lift normalization, N, kappa_i orthogonality and the E Gram matrix."""
    out = frame.tangent_frame().normalization_residuals()
    for label, kappa in (("kappa1", frame.kappa1), ("kappa2", frame.kappa2)):
        for name, w in (("Y", frame.Y), ("Y_u", frame.Y_u), ("Y_v", frame.Y_v), ("N", frame.N)):
            out[f"<{label},{name}>"] = abs(kappa.inner(w).value)
    for a, (e_a, s_a) in enumerate(zip(frame.E, frame.signs)):
        for b, e_b in enumerate(frame.E):
            target = float(s_a) if a == b else 0.0
            out[f"<E{a},E{b}>"] = abs(e_a.inner(e_b).value - target)
    return out


# ---------------------------------------------------------------------------
# Residual records
# ---------------------------------------------------------------------------

class ResidualRecord(BaseModel):
    """Named residuals at one point."""
    point: Tuple[float, float]
    values: Dict[str, float]
    tolerance: float

    @property
    def worst(self) -> Tuple[str, float]:
        name = max(self.values, key=self.values.get)
        return name, self.values[name]

    @property
    def passed(self) -> bool:
        return self.worst[1] <= self.tolerance

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        name, value = self.worst
        return f"{status} | ({self.point[0]:.4g}, {self.point[1]:.4g}) | worst {name} = {value:.3e} | tol {self.tolerance:.1e}"


def frame_structure_residuals(frame: ConformalFrame) -> Dict[str, float]:
    """Seven structure-equation lines (psi lines once per E_alpha) plus the normalization relations."""
    Y, Yu, Yv, N = frame.Y, frame.Y_u, frame.Y_v, frame.N
    k1, k2, s1, s2 = frame.kappa1, frame.kappa2, frame.s1, frame.s2
    kk = frame.kk
    Dvk1, Duk2 = frame.D_v(k1), frame.D_u(k2)

    def sup(w: JetVector) -> float:
        return w.value.sup_norm()

    out = {
        "Y_uu": sup(Yu.du() - (Y * (s1 * -0.5) + k1)),
        "Y_vv": sup(Yv.dv() - (Y * (s2 * -0.5) + k2)),
        "Y_uv": sup(Yu.dv() - (Y * (-kk) + N * 0.5)),
        "N_u": sup(N.du() - (Yu * (kk * -2.0) - Yv * s1 + Dvk1 * 2.0)),
        "N_v": sup(N.dv() - (Yu * (-s2) - Yv * (kk * 2.0) + Duk2 * 2.0)),
    }
    for a, psi in enumerate(frame.E):
        rhs_u = frame.D_u(psi) + Y * (psi.inner(Dvk1) * 2.0) - Yv * (psi.inner(k1) * 2.0)
        rhs_v = frame.D_v(psi) + Y * (psi.inner(Duk2) * 2.0) - Yu * (psi.inner(k2) * 2.0)
        out[f"psi_u[E{a}]"] = sup(psi.du() - rhs_u)
        out[f"psi_v[E{a}]"] = sup(psi.dv() - rhs_v)
    out.update(frame.tangent_frame().normalization_residuals())
    return out


def structure_residuals(chart: SurfaceChart, u: float, v: float, order: int = DEFAULT_JET_ORDER,
                        tolerances: Optional[Tolerances] = None) -> ResidualRecord:
    tol = tolerances or Tolerances()
    frame = frame_at(chart, u, v, order, tol)
    return ResidualRecord(point=(u, v), values=frame_structure_residuals(frame), tolerance=tol.structure)


def frame_integrability_residuals(frame: ConformalFrame) -> Dict[str, float]:
    k1, k2, s1, s2 = frame.kappa1, frame.kappa2, frame.s1, frame.s2
    Duk1, Dvk1 = frame.D_u(k1), frame.D_v(k1)
    Duk2, Dvk2 = frame.D_u(k2), frame.D_v(k2)
    gauss_u = s1.dv() * 0.5 - k1.inner(Duk2) * 3.0 - Duk1.inner(k2)
    gauss_v = s2.du() * 0.5 - k1.inner(Dvk2) - Dvk1.inner(k2) * 3.0
    codazzi = frame.D_v(Dvk1) + k1 * (s2 * 0.5) - frame.D_u(Duk2) - k2 * (s1 * 0.5)
    out = {
        "gauss_u": abs(gauss_u.value),
        "gauss_v": abs(gauss_v.value),
        "codazzi": frame.normal_norm(codazzi),
    }
    for a, psi in enumerate(frame.E):
        curvature = frame.D_u(frame.D_v(psi)) - frame.D_v(frame.D_u(psi))
        ricci = curvature - k2 * (psi.inner(k1) * 2.0) + k1 * (psi.inner(k2) * 2.0)
        out[f"ricci[E{a}]"] = frame.normal_norm(ricci)
    return out


def integrability_residuals(chart: SurfaceChart, u: float, v: float, order: int = DEFAULT_JET_ORDER,
                            tolerances: Optional[Tolerances] = None) -> ResidualRecord:
    """Gauss, Codazzi and Ricci residuals at (u, v); needs chart order >= 6."""
    tol = tolerances or Tolerances()
    frame = frame_at(chart, u, v, order, tol)
    return ResidualRecord(point=(u, v), values=frame_integrability_residuals(frame), tolerance=tol.integrability)


def reparametrize(chart: SurfaceChart, f: str, g: str,
                  domain: Optional[Sequence[float]] = None) -> SurfaceChart:
    """Chart x(f(u), g(v)) for increasing f, g given as expressions."""
    return chart.reparametrized(f, g, domain if domain is not None else chart.domain)
