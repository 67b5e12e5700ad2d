"""Willmore, S-Willmore and isothermic detectors, adapted coordinates and the Willmore energy."""

from __future__ import annotations

import dataclasses
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from ..config import DEFAULT_JET_ORDER, Tolerances
from ..errors import IsothermicTypeError, UmbilicError
from . import jets
from .catalog import SurfaceChart
from .frame import ConformalFrame, frame_at
from .grid import Grid, cumulative, field, integrate, summarize, sweep

logger = logging.getLogger(__name__)

UMBILIC_FREE_FRACTION = 0.01


# ---------------------------------------------------------------------------
# Per-point kernels
# ---------------------------------------------------------------------------

def frame_willmore_residual(frame: ConformalFrame) -> Tuple[float, float]:
    k1, k2 = frame.kappa1, frame.kappa2
    w1 = frame.D_v(frame.D_v(k1)) + k1 * (frame.s2 * 0.5)
    w2 = frame.D_u(frame.D_u(k2)) + k2 * (frame.s1 * 0.5)
    return frame.normal_norm(w1), frame.normal_norm(w2)


def willmore_residual(chart: SurfaceChart, u: float, v: float, order: int = DEFAULT_JET_ORDER,
                      tolerances: Optional[Tolerances] = None) -> Tuple[float, float]:
    """(|D_v D_v kappa1 + (s2/2) kappa1|, |D_u D_u kappa2 + (s1/2) kappa2|) at (u, v)."""
    return frame_willmore_residual(frame_at(chart, u, v, order, tolerances))


@dataclasses.dataclass(frozen=True)
class PointSample:
    """Detector quantities at one grid point (NaN where undefined)."""
    u: float
    v: float
    s1: float
    s2: float
    k1: float
    k2: float
    kk: float
    willmore1: float
    willmore2: float
    umbilic: bool
    mu1: float = math.nan
    mu2: float = math.nan
    parallelism: float = math.nan
    ratio: float = math.nan
    ratio_residual: float = math.nan
    separability: float = math.nan

    def as_row(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


def _mu(frame: ConformalFrame, kappa, D_kappa) -> Tuple[float, float]:
    """Least-squares mu with D kappa + mu kappa = 0, and the relative residual."""
    mu = -D_kappa.inner(kappa).value / kappa.inner(kappa).value
    residual = frame.normal_norm(D_kappa + kappa * mu) / frame.normal_norm(kappa)
    return mu, residual


def sample_point(chart: SurfaceChart, u: float, v: float, order: int = DEFAULT_JET_ORDER,
                 tolerances: Optional[Tolerances] = None) -> PointSample:
    tol = tolerances or Tolerances()
    frame = frame_at(chart, u, v, order, tol)
    k1, k2 = frame.kappa1, frame.kappa2
    w1, w2 = frame_willmore_residual(frame)
    n1, n2 = frame.normal_norm(k1), frame.normal_norm(k2)
    base = dict(
        u=u, v=v, s1=frame.s1.value, s2=frame.s2.value,
        k1=frame.k1.value, k2=frame.k2.value, kk=frame.kk.value,
        willmore1=w1, willmore2=w2,
    )
    threshold = tol.umbilic * max(1.0, frame.Y.sup_norm())
    if n1 < threshold or n2 < threshold:
        return PointSample(umbilic=True, **base)

    mu1, par1 = _mu(frame, k1, frame.D_v(k1))
    mu2, par2 = _mu(frame, k2, frame.D_u(k2))

    k22 = k2.inner(k2)
    ratio = frame.kk / k22
    ratio_residual = frame.normal_norm(k1 - k2 * ratio.value) / n1
    log_abs = jets.log(ratio if ratio.value > 0 else -ratio)
    return PointSample(
        umbilic=False,
        mu1=mu1, mu2=mu2, parallelism=max(par1, par2),
        ratio=ratio.value, ratio_residual=ratio_residual,
        separability=abs(log_abs.partial(1, 1)),
        **base,
    )


def sample_grid(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
                tolerances: Optional[Tolerances] = None, workers: int = 4,
                progress: bool = False) -> List[List[PointSample]]:
    """Per-point detector samples over ``grid``, indexed [i][j]."""
    tol = tolerances or Tolerances()
    samples = sweep(lambda u, v: sample_point(chart, u, v, order, tol), grid, workers,
                    desc="detect" if progress else None)
    umbilic = sum(s.umbilic for row in samples for s in row)
    if umbilic:
        logger.info("%d of %d grid points umbilic; skipped in ratio statistics", umbilic, grid.nu * grid.nv)
    return samples


def _nan_to_none(values: np.ndarray) -> List[List[Optional[float]]]:
    return [[None if np.isnan(x) else float(x) for x in row] for row in values]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class WillmoreReport(BaseModel):
    sup: float
    mean: float
    argmax_point: Optional[List[float]] = None
    is_willmore: bool

    def __str__(self) -> str:
        return f"{'PASS' if self.is_willmore else 'FAIL'} | Willmore residual sup {self.sup:.3e}, mean {self.mean:.3e}"


class SWillmoreReport(BaseModel):
    mu1: List[List[Optional[float]]]
    mu2: List[List[Optional[float]]]
    parallelism_residual: float
    willmore_sup: float
    umbilic_points: int
    is_swillmore: bool

    def __str__(self) -> str:
        status = "PASS" if self.is_swillmore else "FAIL"
        return (f"{status} | S-Willmore parallelism {self.parallelism_residual:.3e} | "
                f"Willmore {self.willmore_sup:.3e} | umbilic {self.umbilic_points}")


class IsothermicReport(BaseModel):
    parallel_residual: float
    separability_residual: float
    sign: Optional[int] = None
    mixed_type: bool = False
    umbilic_points: int = 0
    umbilic_free: bool = True

    @property
    def sign_label(self) -> str:
        return {1: "+", -1: "-"}.get(self.sign, "none")

    def __str__(self) -> str:
        status = "PASS" if self.sign is not None else "FAIL"
        return (f"{status} | isothermic sign {self.sign_label} | parallel {self.parallel_residual:.3e} | "
                f"separability {self.separability_residual:.3e}")


class DetectorReport(BaseModel):
    """Combined result of the detectors on one grid."""
    chart: str
    grid: Dict[str, object]
    willmore: WillmoreReport
    swillmore: Optional[SWillmoreReport] = None
    isothermic: Optional[IsothermicReport] = None
    energy_W: float
    notes: List[str] = []

    def __str__(self) -> str:
        lines = [f"{self.chart} | W = {self.energy_W:.10g}", str(self.willmore)]
        if self.swillmore is not None:
            lines.append(str(self.swillmore))
        if self.isothermic is not None:
            lines.append(str(self.isothermic))
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _samples_field(samples, name: str) -> np.ndarray:
    return field(samples, lambda s: getattr(s, name))


def willmore_report(samples: List[List[PointSample]], grid: Grid, tol: Tolerances) -> WillmoreReport:
    residual = np.maximum(_samples_field(samples, "willmore1"), _samples_field(samples, "willmore2"))
    stats = summarize(residual, grid)
    return WillmoreReport(
        sup=stats["max"], mean=stats["mean"], argmax_point=stats["argmax_point"],
        is_willmore=stats["max"] <= tol.willmore,
    )


def _umbilic_count(samples) -> int:
    return int(sum(s.umbilic for row in samples for s in row))


def swillmore_report(samples: List[List[PointSample]], grid: Grid, tol: Tolerances) -> SWillmoreReport:
    umbilic = _umbilic_count(samples)
    if umbilic == grid.nu * grid.nv:
        raise UmbilicError("identically umbilic")
    parallelism = float(np.nanmax(_samples_field(samples, "parallelism")))
    willmore = willmore_report(samples, grid, tol)
    return SWillmoreReport(
        mu1=_nan_to_none(_samples_field(samples, "mu1")),
        mu2=_nan_to_none(_samples_field(samples, "mu2")),
        parallelism_residual=parallelism,
        willmore_sup=willmore.sup,
        umbilic_points=umbilic,
        is_swillmore=parallelism <= tol.parallel and willmore.is_willmore,
    )


def isothermic_report(samples: List[List[PointSample]], grid: Grid, tol: Tolerances) -> IsothermicReport:
    total = grid.nu * grid.nv
    umbilic = _umbilic_count(samples)
    if umbilic == total:
        raise UmbilicError("identically umbilic")
    if umbilic > total // 2:
        raise UmbilicError(f"umbilic-dominated grid: {umbilic} of {total} points")
    ratio = _samples_field(samples, "ratio")
    parallel = float(np.nanmax(_samples_field(samples, "ratio_residual")))
    separability = float(np.nanmax(_samples_field(samples, "separability")))
    signs = set(np.sign(ratio[~np.isnan(ratio)]).astype(int).tolist())
    mixed = len(signs) > 1
    sign = None
    if parallel <= tol.parallel and separability <= tol.separability and not mixed:
        sign = signs.pop()
    return IsothermicReport(
        parallel_residual=parallel,
        separability_residual=separability,
        sign=sign,
        mixed_type=mixed,
        umbilic_points=umbilic,
        umbilic_free=umbilic < UMBILIC_FREE_FRACTION * total,
    )


def swillmore_test(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
                   tolerances: Optional[Tolerances] = None, workers: int = 4) -> SWillmoreReport:
    """mu_i fields, parallelism residual and the S-Willmore flag.

    Raises:
        UmbilicError: every grid point is umbilic.
    """
    tol = tolerances or Tolerances()
    return swillmore_report(sample_grid(chart, grid, order, tol, workers), grid, tol)


def isothermic_test(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
                    tolerances: Optional[Tolerances] = None, workers: int = 4) -> IsothermicReport:
    """Pointwise ratio kappa1 = r kappa2, its parallelism and separability, and the sign of r.

    Raises:
        UmbilicError: identically umbilic or umbilic-dominated grid.
    """
    tol = tolerances or Tolerances()
    return isothermic_report(sample_grid(chart, grid, order, tol, workers), grid, tol)


def willmore_energy(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
                    tolerances: Optional[Tolerances] = None, workers: int = 4) -> float:
    """2 * integral of <kappa1, kappa2> du dv over the grid rectangle (Simpson)."""
    tol = tolerances or Tolerances()
    kk = field(sweep(lambda u, v: frame_at(chart, u, v, order, tol).kk.value, grid, workers), float)
    return 2.0 * integrate(kk, grid)


def detect(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
           tolerances: Optional[Tolerances] = None, workers: int = 4,
           progress: bool = False) -> Tuple[DetectorReport, List[List[PointSample]]]:
    """All detectors from one sweep; umbilic failures become notes."""
    tol = tolerances or Tolerances()
    samples = sample_grid(chart, grid, order, tol, workers, progress)
    notes: List[str] = []
    swillmore = isothermic = None
    try:
        swillmore = swillmore_report(samples, grid, tol)
    except UmbilicError as e:
        notes.append(f"S-Willmore: {e}")
    try:
        isothermic = isothermic_report(samples, grid, tol)
    except UmbilicError as e:
        notes.append(f"isothermic: {e}")
    report = DetectorReport(
        chart=chart.name,
        grid=grid.describe(),
        willmore=willmore_report(samples, grid, tol),
        swillmore=swillmore,
        isothermic=isothermic,
        energy_W=2.0 * integrate(_samples_field(samples, "kk"), grid),
        notes=notes,
    )
    return report, samples


# ---------------------------------------------------------------------------
# Adapted coordinates
# ---------------------------------------------------------------------------

class AdaptedCoordinates(BaseModel):
    """Tabulated new coordinates f(u), g(v) in which kappa1 = sign * kappa2."""
    us: List[float]
    vs: List[float]
    f: List[float]
    g: List[float]
    f_prime: List[float]
    g_prime: List[float]
    sign: int
    verification_residual: float

    def __str__(self) -> str:
        return (f"adapted ({'+' if self.sign > 0 else '-'}) | f' in [{min(self.f_prime):.4g}, {max(self.f_prime):.4g}] | "
                f"g' in [{min(self.g_prime):.4g}, {max(self.g_prime):.4g}] | residual {self.verification_residual:.3e}")


def adapt_coordinates(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
                      tolerances: Optional[Tolerances] = None, workers: int = 4) -> AdaptedCoordinates:
    """Split r = sigma1(u) / sigma2(v) and integrate f' = |sigma1|^(1/2), g' = |sigma2|^(1/2).

    Raises:
        IsothermicTypeError: separability fails or r changes sign in the grid.
        UmbilicError: propagated from the isothermic test.
    """
    tol = tolerances or Tolerances()
    samples = sample_grid(chart, grid, order, tol, workers)
    report = isothermic_report(samples, grid, tol)
    if report.mixed_type:
        raise IsothermicTypeError("mixed isothermic type")
    if report.sign is None:
        raise IsothermicTypeError(
            f"not isothermic: parallel {report.parallel_residual:.3e}, separability {report.separability_residual:.3e}"
        )
    ratio = _samples_field(samples, "ratio")
    if np.isnan(ratio[:, 0]).any() or np.isnan(ratio[0, :]).any():
        raise UmbilicError("umbilic point on the adaptation axes u = u0 or v = v0")
    sigma1 = ratio[:, 0]
    sigma2 = ratio[0, 0] / ratio[0, :]
    f_prime = np.sqrt(np.abs(sigma1))
    g_prime = np.sqrt(np.abs(sigma2))
    if np.any(f_prime <= 0) or np.any(g_prime <= 0):
        raise IsothermicTypeError("adapted coordinates have a degenerate Jacobian")
    f = grid.u0 + cumulative(f_prime, grid.hu)
    g = grid.v0 + cumulative(g_prime, grid.hv)

    # kappa in the new coordinates: k1 F'^(-3/2) G'^(1/2) versus k2 F'^(1/2) G'^(-3/2)
    k1 = _samples_field(samples, "k1")
    k2 = _samples_field(samples, "k2")
    Fp, Gp = np.meshgrid(f_prime, g_prime, indexing="ij")
    new1 = k1 * Fp ** -1.5 * Gp ** 0.5
    new2 = k2 * Fp ** 0.5 * Gp ** -1.5
    usable = ~np.isnan(ratio)
    residual = float(np.max(np.abs(new1 - report.sign * new2)[usable] / np.abs(new1[usable])))
    return AdaptedCoordinates(
        us=grid.us.tolist(), vs=grid.vs.tolist(),
        f=f.tolist(), g=g.tolist(),
        f_prime=f_prime.tolist(), g_prime=g_prime.tolist(),
        sign=report.sign, verification_residual=residual,
    )
