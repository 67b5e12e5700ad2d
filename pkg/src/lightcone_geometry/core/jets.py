"""
Bivariate truncated Taylor jets in the asymptotic coordinates (u, v).

A ``Jet2`` of order J stores the normalized Taylor coefficients

    c[i, j] = (1 / (i! j!)) d^{i+j} f / du^i dv^j      for i + j <= J

at a base point, flattened into a 1-D array.  Products are truncated Cauchy
convolutions, elementary functions are univariate Taylor series composed with
the nilpotent part of the argument.  Differentiating a jet lowers its order by
one; binary operations between jets of different orders truncate to the lower
order, so the order budget of a pipeline is tracked automatically:

    chart jets (J) -> canonical lift (J-1) -> kappa_i (J-3) -> D D kappa_i (J-5)

``JetVector`` stacks jets of the components of a vector in R^{n+2}_{r+1} and
carries its ``MetricSignature``; its ``inner`` is a ``Jet2`` obeying the product
rule.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from ..errors import JetDomainError, OrderExhaustedError, SignatureMismatchError
from .pseudo_linear import MetricSignature, PseudoVector

EPS_JET = 1e-12

Scalar = Union[float, int, np.floating]


# ---------------------------------------------------------------------------
# Coefficient layout (cached per order)
# ---------------------------------------------------------------------------

class _Layout:
    """Index bookkeeping for one truncation order."""

    def __init__(self, order: int):
        self.order = order
        self.index: List[Tuple[int, int]] = [
            (i, d - i) for d in range(order + 1) for i in range(d, -1, -1)
        ]
        self.pos = {ij: k for k, ij in enumerate(self.index)}
        self.size = len(self.index)

        left, right, target = [], [], []
        for ka, (p, q) in enumerate(self.index):
            for kb, (r, s) in enumerate(self.index):
                if p + q + r + s <= order:
                    left.append(ka)
                    right.append(kb)
                    target.append(self.pos[(p + r, q + s)])
        self.left = np.array(left, dtype=np.intp)
        self.right = np.array(right, dtype=np.intp)
        scatter = np.zeros((len(target), self.size))
        scatter[np.arange(len(target)), target] = 1.0
        self.scatter = scatter

        self.factorial = np.array(
            [math.factorial(i) * math.factorial(j) for i, j in self.index], dtype=float
        )


@lru_cache(maxsize=None)
def _layout(order: int) -> _Layout:
    if order < 0:
        raise OrderExhaustedError()
    return _Layout(order)


@lru_cache(maxsize=None)
def _truncation(src_order: int, dst_order: int) -> np.ndarray:
    src = _layout(src_order)
    return np.array([src.pos[ij] for ij in _layout(dst_order).index], dtype=np.intp)


@lru_cache(maxsize=None)
def _derivative(order: int, direction: str) -> Tuple[np.ndarray, np.ndarray]:
    """Source positions and factors for d/du or d/dv of an order-``order`` jet."""
    src = _layout(order)
    dst = _layout(order - 1)
    positions, factors = [], []
    for i, j in dst.index:
        if direction == "u":
            positions.append(src.pos[(i + 1, j)])
            factors.append(i + 1)
        else:
            positions.append(src.pos[(i, j + 1)])
            factors.append(j + 1)
    return np.array(positions, dtype=np.intp), np.array(factors, dtype=float)


def _product(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    lay = _layout(order)
    return (a[..., lay.left] * b[..., lay.right]) @ lay.scatter


# ---------------------------------------------------------------------------
# Scalar jets
# ---------------------------------------------------------------------------

class Jet2:
    """Truncated bivariate Taylor expansion of a scalar function."""

    __slots__ = ("coeffs", "order")
    __array_ufunc__ = None

    def __init__(self, coeffs: np.ndarray, order: int):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.order = order

    @classmethod
    def constant(cls, value: Scalar, order: int) -> "Jet2":
        coeffs = np.zeros(_layout(order).size)
        coeffs[0] = float(value)
        return cls(coeffs, order)

    @classmethod
    def linear(cls, value: Scalar, du: Scalar, dv: Scalar, order: int) -> "Jet2":
        jet = cls.constant(value, order)
        if order >= 1:
            lay = _layout(order)
            jet.coeffs[lay.pos[(1, 0)]] = float(du)
            jet.coeffs[lay.pos[(0, 1)]] = float(dv)
        return jet

    @classmethod
    def variable(cls, name: str, value: Scalar, order: int) -> "Jet2":
        if name == "u":
            return cls.linear(value, 1.0, 0.0, order)
        if name == "v":
            return cls.linear(value, 0.0, 1.0, order)
        raise ValueError(f"Unknown jet variable {name!r}")

    @classmethod
    def from_partials(cls, partials: dict, order: int) -> "Jet2":
        """Build a jet from a mapping (i, j) -> d^{i+j}f/du^i dv^j."""
        lay = _layout(order)
        coeffs = np.zeros(lay.size)
        for (i, j), value in partials.items():
            if i + j <= order:
                coeffs[lay.pos[(i, j)]] = value / (math.factorial(i) * math.factorial(j))
        return cls(coeffs, order)

    # -- access ---------------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coefficient(self, i: int, j: int) -> float:
        if i + j > self.order:
            raise OrderExhaustedError()
        return float(self.coeffs[_layout(self.order).pos[(i, j)]])

    def partial(self, i: int, j: int) -> float:
        """Return d^{i+j} f / du^i dv^j at the base point."""
        return self.coefficient(i, j) * math.factorial(i) * math.factorial(j)

    def truncate(self, order: int) -> "Jet2":
        if order == self.order:
            return self
        if order > self.order:
            raise OrderExhaustedError()
        return Jet2(self.coeffs[_truncation(self.order, order)], order)

    def du(self) -> "Jet2":
        if self.order < 1:
            raise OrderExhaustedError()
        positions, factors = _derivative(self.order, "u")
        return Jet2(self.coeffs[positions] * factors, self.order - 1)

    def dv(self) -> "Jet2":
        if self.order < 1:
            raise OrderExhaustedError()
        positions, factors = _derivative(self.order, "v")
        return Jet2(self.coeffs[positions] * factors, self.order - 1)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def at(self, du: float, dv: float) -> float:
        """Value of the Taylor polynomial at the offset (du, dv) from the base point."""
        lay = _layout(self.order)
        powers = np.array([du ** i * dv ** j for i, j in lay.index])
        return float(self.coeffs @ powers)

    # -- arithmetic ------------------------------------------------------------

    def _coerce(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet2.constant(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = _align(self, other)
        return Jet2(a.coeffs + b.coeffs, a.order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = _align(self, other)
        return Jet2(a.coeffs - b.coeffs, a.order)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__sub__(self)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.coeffs, self.order)

    def __pos__(self) -> "Jet2":
        return self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return Jet2(self.coeffs * float(other), self.order)
        if not isinstance(other, Jet2):
            return NotImplemented
        a, b = _align(self, other)
        return Jet2(_product(a.coeffs, b.coeffs, a.order), a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            if abs(other) <= EPS_JET:
                raise JetDomainError("division by (near-)zero constant")
            return Jet2(self.coeffs / float(other), self.order)
        if not isinstance(other, Jet2):
            return NotImplemented
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * reciprocal(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __rpow__(self, base):
        return power(Jet2.constant(base, self.order), self)

    def __repr__(self) -> str:
        return f"Jet2(order={self.order}, value={self.value:.6g})"


def _align(a: Jet2, b: Jet2) -> Tuple[Jet2, Jet2]:
    order = min(a.order, b.order)
    return a.truncate(order), b.truncate(order)


def _compose(x: Jet2, series: Sequence[float]) -> Jet2:
    """Evaluate sum_k series[k] * h^k with h the nilpotent part of ``x``."""
    h = x.coeffs.copy()
    h[0] = 0.0
    out = np.zeros_like(h)
    out[0] = series[0]
    term = np.zeros_like(h)
    term[0] = 1.0
    for k in range(1, x.order + 1):
        term = _product(term, h, x.order)
        out = out + series[k] * term
    return Jet2(out, x.order)


def reciprocal(x: Jet2) -> Jet2:
    a0 = x.value
    if abs(a0) <= EPS_JET:
        raise JetDomainError("division by (near-)zero constant term")
    return _compose(x, [(-1.0) ** k / a0 ** (k + 1) for k in range(x.order + 1)])


def power(x: Jet2, exponent) -> Jet2:
    """x ** exponent for a numeric or jet exponent."""
    if isinstance(exponent, Jet2):
        if not np.any(exponent.coeffs[1:]):
            return power(x, exponent.value)
        return exp(exponent * log(x))
    p = float(exponent)
    if p.is_integer():
        n = int(p)
        base = x if n >= 0 else reciprocal(x)
        n = abs(n)
        result = Jet2.constant(1.0, x.order)
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result
    a0 = x.value
    if a0 <= EPS_JET:
        raise JetDomainError(f"non-integer power of non-positive constant term {a0:.3g}")
    series = [a0 ** p]
    coeff = 1.0
    for k in range(1, x.order + 1):
        coeff *= (p - k + 1) / k
        series.append(coeff * a0 ** (p - k))
    return _compose(x, series)


# ---------------------------------------------------------------------------
# Elementary functions (floats pass through to numpy)
# ---------------------------------------------------------------------------

def sqrt(x):
    if not isinstance(x, Jet2):
        if x < 0:
            raise JetDomainError(f"sqrt of negative value {x:.3g}")
        return math.sqrt(x)
    if x.value < 0 or abs(x.value) <= EPS_JET:
        raise JetDomainError(f"sqrt of non-positive constant term {x.value:.3g}")
    return power(x, 0.5)


def exp(x):
    if not isinstance(x, Jet2):
        return math.exp(x)
    e0 = math.exp(x.value)
    return _compose(x, [e0 / math.factorial(k) for k in range(x.order + 1)])


def log(x):
    if not isinstance(x, Jet2):
        if x <= 0:
            raise JetDomainError(f"log of non-positive value {x:.3g}")
        return math.log(x)
    a0 = x.value
    if a0 <= EPS_JET:
        raise JetDomainError(f"log of non-positive constant term {a0:.3g}")
    series = [math.log(a0)] + [(-1.0) ** (k + 1) / (k * a0 ** k) for k in range(1, x.order + 1)]
    return _compose(x, series)


def _cyclic(x: Jet2, cycle: Sequence[float]) -> Jet2:
    return _compose(x, [cycle[k % 4] / math.factorial(k) for k in range(x.order + 1)])


def sin(x):
    if not isinstance(x, Jet2):
        return math.sin(x)
    s, c = math.sin(x.value), math.cos(x.value)
    return _cyclic(x, [s, c, -s, -c])


def cos(x):
    if not isinstance(x, Jet2):
        return math.cos(x)
    s, c = math.sin(x.value), math.cos(x.value)
    return _cyclic(x, [c, -s, -c, s])


def sinh(x):
    if not isinstance(x, Jet2):
        return math.sinh(x)
    s, c = math.sinh(x.value), math.cosh(x.value)
    return _cyclic(x, [s, c, s, c])


def cosh(x):
    if not isinstance(x, Jet2):
        return math.cosh(x)
    s, c = math.sinh(x.value), math.cosh(x.value)
    return _cyclic(x, [c, s, c, s])


def partial(f: Jet2, i: int, j: int) -> float:
    """Return i! j! coeffs[i][j]; raises OrderExhaustedError past the order."""
    return f.partial(i, j)


# ---------------------------------------------------------------------------
# Vector jets
# ---------------------------------------------------------------------------

class JetVector:
    """Jets of the components of a vector in R^{n+2}_{r+1}."""

    __slots__ = ("coeffs", "order", "signature")
    __array_ufunc__ = None

    def __init__(self, coeffs: np.ndarray, order: int, signature: MetricSignature):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.order = order
        self.signature = signature

    @classmethod
    def from_components(cls, components: Iterable[Jet2], signature: MetricSignature) -> "JetVector":
        comps = list(components)
        if len(comps) != signature.dimension:
            raise SignatureMismatchError(
                f"{len(comps)} components for signature {signature}"
            )
        order = min(c.order for c in comps)
        return cls(np.stack([c.truncate(order).coeffs for c in comps]), order, signature)

    @classmethod
    def constant(cls, vector, order: int, signature: MetricSignature) -> "JetVector":
        coords = np.asarray(vector.coords if isinstance(vector, PseudoVector) else vector, dtype=float)
        coeffs = np.zeros((signature.dimension, _layout(order).size))
        coeffs[:, 0] = coords
        return cls(coeffs, order, signature)

    @property
    def components(self) -> List[Jet2]:
        return [Jet2(row, self.order) for row in self.coeffs]

    @property
    def value(self) -> PseudoVector:
        return PseudoVector(self.coeffs[:, 0].copy(), self.signature)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.coeffs[:, 0])))

    def truncate(self, order: int) -> "JetVector":
        if order == self.order:
            return self
        if order > self.order:
            raise OrderExhaustedError()
        return JetVector(self.coeffs[:, _truncation(self.order, order)], order, self.signature)

    def du(self) -> "JetVector":
        if self.order < 1:
            raise OrderExhaustedError()
        positions, factors = _derivative(self.order, "u")
        return JetVector(self.coeffs[:, positions] * factors, self.order - 1, self.signature)

    def dv(self) -> "JetVector":
        if self.order < 1:
            raise OrderExhaustedError()
        positions, factors = _derivative(self.order, "v")
        return JetVector(self.coeffs[:, positions] * factors, self.order - 1, self.signature)

    def _check(self, other: "JetVector") -> Tuple["JetVector", "JetVector"]:
        if self.signature != other.signature:
            raise SignatureMismatchError(f"{self.signature} vs {other.signature}")
        order = min(self.order, other.order)
        return self.truncate(order), other.truncate(order)

    def inner(self, other: "JetVector") -> Jet2:
        a, b = self._check(other)
        lay = _layout(a.order)
        weighted = (a.coeffs[:, lay.left] * b.coeffs[:, lay.right]) * a.signature.diag[:, None]
        return Jet2(weighted.sum(axis=0) @ lay.scatter, a.order)

    def __add__(self, other):
        if not isinstance(other, JetVector):
            return NotImplemented
        a, b = self._check(other)
        return JetVector(a.coeffs + b.coeffs, a.order, a.signature)

    def __sub__(self, other):
        if not isinstance(other, JetVector):
            return NotImplemented
        a, b = self._check(other)
        return JetVector(a.coeffs - b.coeffs, a.order, a.signature)

    def __neg__(self) -> "JetVector":
        return JetVector(-self.coeffs, self.order, self.signature)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating, np.integer)):
            return JetVector(self.coeffs * float(other), self.order, self.signature)
        if isinstance(other, Jet2):
            order = min(self.order, other.order)
            mine = self.truncate(order)
            return JetVector(
                _product(other.truncate(order).coeffs[None, :], mine.coeffs, order),
                order,
                self.signature,
            )
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet2):
            return self * reciprocal(other)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return JetVector(self.coeffs / float(other), self.order, self.signature)
        return NotImplemented

    def __repr__(self) -> str:
        return f"JetVector(order={self.order}, value={np.round(self.coeffs[:, 0], 6).tolist()})"
