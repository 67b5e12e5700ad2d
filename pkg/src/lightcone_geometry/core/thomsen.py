"""From an isothermic Willmore surface to a minimal surface in a Lorentzian space form.

The dual surface Yhat (a = -k1_v/k1, b = -k2_u/k2, xi = 0) of an isothermic
Willmore surface degenerates against Y along the constant point

    Y0 = Yhat - rho Y,      rho = 2 a_u - 2 <k1, k2>,

whose causal type selects the space form: null -> R^3_1, timelike -> S^3_1,
spacelike -> H^3_1.  After a normalizing O(3,2) transform, the surface is
read back in that space form and its mean curvature is checked to vanish.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..config import DEFAULT_JET_ORDER, ChartSource, Tolerances
from ..errors import BranchMismatchError, CausalTypeError, PreconditionFailed
from .catalog import SPACE_SIGNATURES, SurfaceChart, space_normal
from .detectors import isothermic_report, sample_grid, willmore_report
from .frame import ConformalFrame, frame_at
from .grid import Grid, diff4, sweep
from .pseudo_linear import (
    CausalType,
    PseudoVector,
    causal_type,
    normalizing_transform,
    wedge_defect,
)

logger = logging.getLogger(__name__)

BRANCHES = {
    CausalType.NULL: ChartSource.R31,
    CausalType.TIMELIKE: ChartSource.S31,
    CausalType.SPACELIKE: ChartSource.H31,
}
_BOUNDARY_EPS = 1e-9


# ---------------------------------------------------------------------------
# Space-form recovery
# ---------------------------------------------------------------------------

@dataclasses.dataclass
class RecoveredChart:
    """A space-form surface sampled on a grid (NaN rows at excluded points)."""
    branch: ChartSource
    grid: Grid
    x: np.ndarray
    valid: np.ndarray
    omega: np.ndarray
    H: np.ndarray

    @property
    def excluded(self) -> int:
        return int((~self.valid).sum())

    def rows(self) -> List[Dict[str, float]]:
        rows = []
        for i, j, u, v in self.grid.points():
            row = {"u": u, "v": v}
            row.update({f"x{k}": float(c) for k, c in enumerate(self.x[i, j])})
            row["omega"] = float(self.omega[i, j])
            row["H"] = float(self.H[i, j])
            rows.append(row)
        return rows


def _extract(Y: np.ndarray, branch: ChartSource) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scaled space-form coordinates, the constraint defect and the denominators."""
    sig = SPACE_SIGNATURES[branch]
    if branch is ChartSource.R31:
        denom = Y[..., 4] - Y[..., 0]
    elif branch is ChartSource.S31:
        denom = Y[..., 4]
    else:
        denom = Y[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = Y / denom[..., None]
    if branch is ChartSource.R31:
        x = scaled[..., 1:4]
        target = scaled[..., 0] + scaled[..., 4]
    elif branch is ChartSource.S31:
        x = scaled[..., 0:4]
        target = np.ones(denom.shape)
    else:
        x = scaled[..., 1:5]
        target = -np.ones(denom.shape)
    q = np.sum(x * x * sig.diag, axis=-1)
    return x, np.abs(q - target), denom


def recover_spaceform_chart(Y: np.ndarray, branch: ChartSource, grid: Grid,
                            tolerances: Optional[Tolerances] = None) -> RecoveredChart:
    """Read normalized light-cone representatives back in the space form of ``branch``.

    ``Y`` has shape (nu, nv, 5).  Points whose scaling denominator vanishes are
    flagged as chart boundary and excluded.

    Raises:
        BranchMismatchError: the space-form constraint fails by more than ``tolerances.branch``.
    """
    tol = tolerances or Tolerances()
    branch = ChartSource(branch)
    Y = np.asarray(Y, dtype=float)
    scale = np.max(np.abs(Y), axis=-1)
    x, defect, denom = _extract(Y, branch)
    valid = np.abs(denom) > _BOUNDARY_EPS * np.maximum(1.0, scale)
    if (~valid).any():
        logger.info("%d grid point(s) on the chart boundary excluded", int((~valid).sum()))
    x = np.where(valid[..., None], x, np.nan)
    worst = float(np.nanmax(np.where(valid, defect, np.nan))) if valid.any() else 0.0
    if worst > tol.branch:
        raise BranchMismatchError(f"branch mismatch: {branch.value} constraint defect {worst:.3g}")

    sig = SPACE_SIGNATURES[branch]
    xu = diff4(x, grid.hu, axis=0)
    xv = diff4(x, grid.hv, axis=1)
    xuv = diff4(xu, grid.hv, axis=1)
    e2w = 2.0 * np.sum(xu * xv * sig.diag, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        omega = 0.5 * np.log(e2w)
    H = np.full(valid.shape, np.nan)
    for i, j, _, _ in grid.points():
        if not (valid[i, j] and np.isfinite(xuv[i, j]).all() and e2w[i, j] > 0):
            continue
        n = space_normal(branch, x[i, j], xu[i, j], xv[i, j])
        H[i, j] = 2.0 * float(np.sum(xuv[i, j] * n.coords * sig.diag)) / e2w[i, j]
    return RecoveredChart(branch=branch, grid=grid, x=x, valid=valid, omega=omega, H=H)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class _ThomsenPoint:
    rho: float
    rho2: float
    prop_u: float
    prop_v: float
    Y: np.ndarray
    Y0: np.ndarray


def _thomsen_point(frame: ConformalFrame) -> _ThomsenPoint:
    k1, k2 = frame.k1, frame.k2
    a = -k1.dv() / k1
    b = -k2.du() / k2
    kk = frame.kk
    rho = a.du() * 2.0 - kk * 2.0
    rho2 = b.dv() * 2.0 - kk * 2.0
    Yhat = frame.N + frame.Y_u * (a * 2.0) + frame.Y_v * (b * 2.0) + frame.Y * (a * b * 2.0)
    Y0 = Yhat - frame.Y * rho
    return _ThomsenPoint(
        rho=rho.value,
        rho2=rho2.value,
        prop_u=abs(rho.du().value - 2.0 * b.value * rho.value),
        prop_v=abs(rho.dv().value - 2.0 * a.value * rho.value),
        Y=frame.Y.value.coords,
        Y0=Y0.value.coords,
    )


class ThomsenResult(BaseModel):
    """Outcome of the isothermic-Willmore to minimal-surface pipeline."""
    model_config = {"arbitrary_types_allowed": True}

    chart: str
    grid: Dict[str, object]
    contained_in_s21: bool = False
    isothermic_sign: Optional[int] = None
    rho_sup: Optional[float] = None
    rho_cross_residual: Optional[float] = None
    rho_propagation_residual: Optional[float] = None
    Y0: Optional[List[float]] = None
    direction_residual: Optional[float] = None
    causal: Optional[CausalType] = None
    transform: Optional[List[List[float]]] = None
    transform_target: Optional[str] = None
    metric_residual: Optional[float] = None
    branch: Optional[ChartSource] = None
    H_residual: Optional[float] = None
    min_exp2omega: Optional[float] = None
    excluded_points: int = 0
    warnings: List[str] = []
    recovered: Optional[RecoveredChart] = Field(default=None, exclude=True)

    def passed(self, tolerances: Optional[Tolerances] = None) -> bool:
        tol = tolerances or Tolerances()
        if self.contained_in_s21:
            return True
        return (
            self.H_residual is not None and self.H_residual <= tol.thomsen
            and (self.direction_residual or 0.0) <= tol.thomsen
        )

    def __str__(self) -> str:
        if self.contained_in_s21:
            return f"{self.chart} | contained in some S^2_1, minimal in S^3_1"
        return (f"{'PASS' if self.passed() else 'FAIL'} | {self.chart} | causal {self.causal.value} -> "
                f"{self.branch.value} | rho sup {_fmt(self.rho_sup)} | H sup {_fmt(self.H_residual)}")


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3e}"


def _gate(condition: str) -> PreconditionFailed:
    logger.warning("precondition failed: %s", condition)
    return PreconditionFailed(condition)


def thomsen_pipeline(chart: SurfaceChart, grid: Grid, order: int = DEFAULT_JET_ORDER,
                     tolerances: Optional[Tolerances] = None, workers: int = 4) -> ThomsenResult:
    """Dual surface, rho, Y0, causal branch, normalizing transform and minimal-surface recovery.

    Raises:
        PreconditionFailed: chart not isothermic, not Willmore, or with umbilic points.
        CausalTypeError: <Y0, Y0> changes sign across the grid ("inconsistent fixed point").
        BranchMismatchError: recovered points violate the space-form constraint.
    """
    tol = tolerances or Tolerances()
    samples = sample_grid(chart, grid, order, tol, workers)
    total = grid.nu * grid.nv
    umbilic = sum(s.umbilic for row in samples for s in row)
    if umbilic == total:
        logger.info("k vanishes on the grid: %s is contained in some S^2_1", chart.name)
        return ThomsenResult(chart=chart.name, grid=grid.describe(), contained_in_s21=True)
    if umbilic:
        raise _gate("umbilic-free")
    iso = isothermic_report(samples, grid, tol)
    if iso.sign is None:
        raise _gate("isothermic")
    if not willmore_report(samples, grid, tol).is_willmore:
        raise _gate("willmore")
    warnings: List[str] = []
    if iso.sign < 0:
        msg = "(-)-isothermic input: the fixed-point construction assumes (+)-isothermic charts; best-effort output"
        logger.warning(msg)
        warnings.append(msg)

    points: List[List[_ThomsenPoint]] = sweep(
        lambda u, v: _thomsen_point(frame_at(chart, u, v, order, tol)), grid, workers
    )
    flat = [p for row in points for p in row]
    rho = np.array([[p.rho for p in row] for row in points])
    rho2 = np.array([[p.rho2 for p in row] for row in points])

    reps = np.array([p.Y0 / np.linalg.norm(p.Y0) for p in flat])
    reps *= np.where(reps @ reps[0] < 0, -1.0, 1.0)[:, None]
    u_mat, _, _ = np.linalg.svd(reps.T, full_matrices=False)
    Y0 = u_mat[:, 0]
    if Y0 @ reps[0] < 0:
        Y0 = -Y0
    direction = max(wedge_defect(r, Y0) for r in reps)

    quad = np.array([PseudoVector(r).self_inner() for r in reps])
    if quad.max() > tol.causal and quad.min() < -tol.causal:
        raise CausalTypeError("inconsistent fixed point")
    causal = causal_type(PseudoVector(Y0), tol.causal)
    branch = BRANCHES[causal]
    transform = normalizing_transform(PseudoVector(Y0), causal, tol.causal)
    logger.info("fixed point of %s is %s: recovering in %s", chart.name, causal.value, branch.value)

    TY = transform.apply_array(np.array([[p.Y for p in row] for row in points]))
    recovered = recover_spaceform_chart(TY, branch, grid, tol)
    e2w = np.exp(2.0 * recovered.omega[recovered.valid])
    H = np.abs(recovered.H[np.isfinite(recovered.H)])
    if not H.size:
        logger.warning("every recovered point of %s was excluded; no H residual", chart.name)
    return ThomsenResult(
        chart=chart.name,
        grid=grid.describe(),
        isothermic_sign=iso.sign,
        rho_sup=float(np.max(np.abs(rho))),
        rho_cross_residual=float(np.max(np.abs(rho - rho2))),
        rho_propagation_residual=max(max(p.prop_u, p.prop_v) for p in flat),
        Y0=Y0.tolist(),
        direction_residual=direction,
        causal=causal,
        transform=transform.matrix.tolist(),
        transform_target=transform.target_label.value,
        metric_residual=transform.metric_residual(),
        branch=branch,
        H_residual=float(H.max()) if H.size else None,
        min_exp2omega=float(np.nanmin(e2w)) if e2w.size else None,
        excluded_points=recovered.excluded,
        warnings=warnings,
        recovered=recovered,
    )
