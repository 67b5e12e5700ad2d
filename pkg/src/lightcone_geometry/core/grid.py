"""Rectangular parameter grids, parallel point sweeps and grid calculus."""

from __future__ import annotations

import logging
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from pydantic import BaseModel, Field, model_validator
from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")


class Grid(BaseModel):
    """nu x nv points on [u0, u1] x [v0, v1], endpoints included."""
    model_config = {"extra": "forbid", "frozen": True}

    u0: float
    u1: float
    v0: float
    v1: float
    nu: int = Field(20, ge=2)
    nv: int = Field(20, ge=2)

    @model_validator(mode="after")
    def _ordered(self):
        if self.u0 >= self.u1 or self.v0 >= self.v1:
            raise ValueError("grid rectangle must satisfy u0 < u1 and v0 < v1")
        return self

    @classmethod
    def over(cls, rect: Sequence[float], nu: int = 20, nv: int = 20) -> "Grid":
        u0, u1, v0, v1 = (float(x) for x in rect)
        return cls(u0=u0, u1=u1, v0=v0, v1=v1, nu=nu, nv=nv)

    @property
    def us(self) -> np.ndarray:
        return np.linspace(self.u0, self.u1, self.nu)

    @property
    def vs(self) -> np.ndarray:
        return np.linspace(self.v0, self.v1, self.nv)

    @property
    def hu(self) -> float:
        return (self.u1 - self.u0) / (self.nu - 1)

    @property
    def hv(self) -> float:
        return (self.v1 - self.v0) / (self.nv - 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nu, self.nv

    @property
    def rect(self) -> Tuple[float, float, float, float]:
        return self.u0, self.u1, self.v0, self.v1

    def points(self) -> Iterator[Tuple[int, int, float, float]]:
        """Row-major (i, j, u, v)."""
        us, vs = self.us, self.vs
        for i in range(self.nu):
            for j in range(self.nv):
                yield i, j, float(us[i]), float(vs[j])

    def within(self, rect: Sequence[float]) -> bool:
        u0, u1, v0, v1 = rect
        return self.u0 >= u0 and self.u1 <= u1 and self.v0 >= v0 and self.v1 <= v1

    def describe(self) -> Dict[str, object]:
        return {"nu": self.nu, "nv": self.nv, "rect": list(self.rect)}


# ---------------------------------------------------------------------------
# Parallel sweep
# ---------------------------------------------------------------------------

def sweep(
    fn: Callable[[float, float], T],
    grid: Grid,
    workers: int = 4,
    desc: Optional[str] = None,
) -> List[List[T]]:
    """Evaluate ``fn(u, v)`` at every grid point; results indexed [i][j].

    Points run on a thread pool; the merge is by index, so the result is
    independent of completion order.  Exceptions propagate after the pool
    drains.
    """
    out: List[List[Optional[T]]] = [[None] * grid.nv for _ in range(grid.nu)]
    pbar = tqdm(total=grid.nu * grid.nv, desc=desc, file=sys.stderr, disable=desc is None, leave=False)
    first_error: Optional[BaseException] = None
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        future_to_idx = {pool.submit(fn, u, v): (i, j) for i, j, u, v in grid.points()}
        for future in as_completed(future_to_idx):
            i, j = future_to_idx[future]
            try:
                out[i][j] = future.result()
            except Exception as e:
                if first_error is None:
                    first_error = e
            pbar.update(1)
    pbar.close()
    if first_error is not None:
        raise first_error
    return out  # type: ignore[return-value]


def field(values: List[List[T]], key: Callable[[T], float]) -> np.ndarray:
    return np.array([[key(x) for x in row] for row in values], dtype=float)


# ---------------------------------------------------------------------------
# Grid calculus
# ---------------------------------------------------------------------------

_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_FORWARD = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_NEAR = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def diff4(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Fourth-order first derivative along ``axis`` (one-sided stencils at the edges)."""
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if n < 5:
        raise ValueError("fourth-order differences need at least 5 points along the axis")
    d = np.empty_like(f)
    for k in range(2, n - 2):
        d[k] = np.tensordot(_CENTRAL, f[k - 2:k + 3], axes=1)
    d[0] = np.tensordot(_FORWARD, f[0:5], axes=1)
    d[1] = np.tensordot(_NEAR, f[0:5], axes=1)
    d[n - 1] = -np.tensordot(_FORWARD, f[n - 1:n - 6:-1] if n > 5 else f[::-1], axes=1)
    d[n - 2] = -np.tensordot(_NEAR, f[n - 1:n - 6:-1] if n > 5 else f[::-1], axes=1)
    return np.moveaxis(d / h, 0, axis)


def _simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for n points; a 3/8 panel closes an odd interval count."""
    if n < 3:
        raise ValueError("quadrature needs at least 3 points per axis")
    intervals = n - 1
    w = np.zeros(n)
    simpson_end = intervals if intervals % 2 == 0 else intervals - 3
    for k in range(0, simpson_end, 2):
        w[k:k + 3] += np.array([1.0, 4.0, 1.0]) * h / 3.0
    if simpson_end < intervals:
        w[simpson_end:simpson_end + 4] += np.array([1.0, 3.0, 3.0, 1.0]) * 3.0 * h / 8.0
    return w


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Tensor-product Simpson quadrature of a field sampled on ``grid``."""
    wu = _simpson_weights(grid.nu, grid.hu)
    wv = _simpson_weights(grid.nv, grid.hv)
    return float(wu @ np.asarray(values, dtype=float) @ wv)


def cumulative(values: np.ndarray, h: float) -> np.ndarray:
    """Running trapezoid-corrected integral from the first sample (fourth order for smooth data)."""
    f = np.asarray(values, dtype=float)
    out = np.zeros_like(f)
    df = diff4(f, h) if len(f) >= 5 else np.gradient(f, h)
    for k in range(1, len(f)):
        trap = 0.5 * h * (f[k - 1] + f[k])
        out[k] = out[k - 1] + trap - h * h / 12.0 * (df[k] - df[k - 1])
    return out


def summarize(values: np.ndarray, grid: Grid) -> Dict[str, object]:
    """max / mean / argmax point of a non-negative residual field (NaN excluded)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.all(np.isnan(arr)):
        return {"max": 0.0, "mean": 0.0, "argmax_point": None}
    idx = np.unravel_index(np.nanargmax(arr), arr.shape)
    return {
        "max": float(np.nanmax(arr)),
        "mean": float(np.nanmean(arr)),
        "argmax_point": [float(grid.us[idx[0]]), float(grid.vs[idx[1]])],
    }
