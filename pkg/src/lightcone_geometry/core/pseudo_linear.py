"""Indefinite inner-product linear algebra over R^{n+2}_{r+1}."""

from __future__ import annotations

import dataclasses
import logging
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import (
    CausalTypeError,
    DegenerateSubspaceError,
    InvalidFrameError,
    SignatureMismatchError,
)

logger = logging.getLogger(__name__)

EPS_NULL = 1e-8
EPS_CAUSAL = 1e-8
EPS_PIVOT = 1e-10
FRAME_TOL = 1e-10
TRANSFORM_TOL = 1e-12


@dataclasses.dataclass(frozen=True)
class MetricSignature:
    """Diagonal metric: the first ``positives`` coordinates +1, the last ``negatives`` -1."""
    positives: int
    negatives: int

    def __post_init__(self):
        if self.positives < 1 or self.negatives < 1:
            raise ValueError(f"Signature needs positives >= 1 and negatives >= 1, got {self}")

    @property
    def dimension(self) -> int:
        return self.positives + self.negatives

    @property
    def diag(self) -> np.ndarray:
        return np.array([1.0] * self.positives + [-1.0] * self.negatives)

    @property
    def gram(self) -> np.ndarray:
        return np.diag(self.diag)

    def __str__(self) -> str:
        return f"({self.positives},{self.negatives})"


AMBIENT = MetricSignature(3, 2)


@dataclasses.dataclass(frozen=True, eq=False)
class PseudoVector:
    """Coordinates of a vector together with its metric signature."""
    coords: np.ndarray
    signature: MetricSignature = AMBIENT

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.shape != (self.signature.dimension,):
            raise SignatureMismatchError(
                f"{coords.shape[0] if coords.ndim == 1 else coords.shape} coordinates "
                f"for signature {self.signature}"
            )
        object.__setattr__(self, "coords", coords)

    @classmethod
    def basis(cls, k: int, signature: MetricSignature = AMBIENT) -> "PseudoVector":
        coords = np.zeros(signature.dimension)
        coords[k] = 1.0
        return cls(coords, signature)

    def inner(self, other: "PseudoVector") -> float:
        return inner(self, other)

    def self_inner(self) -> float:
        return inner(self, self)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.coords)))

    def is_null(self, eps: float = EPS_NULL) -> bool:
        return abs(self.self_inner()) <= eps * max(1.0, self.sup_norm() ** 2)

    @property
    def value(self) -> "PseudoVector":
        return self

    def __add__(self, other: "PseudoVector") -> "PseudoVector":
        _same_signature(self, other)
        return PseudoVector(self.coords + other.coords, self.signature)

    def __sub__(self, other: "PseudoVector") -> "PseudoVector":
        _same_signature(self, other)
        return PseudoVector(self.coords - other.coords, self.signature)

    def __neg__(self) -> "PseudoVector":
        return PseudoVector(-self.coords, self.signature)

    def __mul__(self, scalar) -> "PseudoVector":
        return PseudoVector(self.coords * float(scalar), self.signature)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "PseudoVector":
        return PseudoVector(self.coords / float(scalar), self.signature)

    def __repr__(self) -> str:
        return f"PseudoVector({np.round(self.coords, 12).tolist()}, {self.signature})"


def _same_signature(x: PseudoVector, y: PseudoVector) -> None:
    if x.signature != y.signature:
        raise SignatureMismatchError(f"signature mismatch: {x.signature} vs {y.signature}")


def inner(x: PseudoVector, y: PseudoVector) -> float:
    """Symmetric bilinear form with the signature's sign pattern."""
    _same_signature(x, y)
    return float(np.sum(x.coords * y.coords * x.signature.diag))


def wedge_defect(x: np.ndarray, y: np.ndarray) -> float:
    """|x ^ y| / (|x| |y|) in the Euclidean norm of the coordinates; 0 iff x and y are parallel."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    nx, ny = np.linalg.norm(x), np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return float("inf")
    outer = np.outer(x, y)
    return float(np.linalg.norm(outer - outer.T) / (np.sqrt(2.0) * nx * ny))


# ---------------------------------------------------------------------------
# Frame splitting V + V^perp
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class TangentFrame:
    """Point values of Y, Y_u, Y_v, N spanning the mean curvature sphere V."""
    Y: Any
    Y_u: Any
    Y_v: Any
    N: Any

    def normalization_residuals(self) -> dict:
        Y, Yu, Yv, N = self.Y, self.Y_u, self.Y_v, self.N
        pairs = {
            "<Y,Y>": (Y.inner(Y), 0.0),
            "<Y_u,Y_u>": (Yu.inner(Yu), 0.0),
            "<Y_v,Y_v>": (Yv.inner(Yv), 0.0),
            "<Y_u,Y_v>": (Yu.inner(Yv), 0.5),
            "<Y,Y_u>": (Y.inner(Yu), 0.0),
            "<Y,Y_v>": (Y.inner(Yv), 0.0),
            "<N,Y_u>": (N.inner(Yu), 0.0),
            "<N,Y_v>": (N.inner(Yv), 0.0),
            "<N,N>": (N.inner(N), 0.0),
            "<N,Y>": (N.inner(Y), -1.0),
        }
        return {name: abs(_value(got) - want) for name, (got, want) in pairs.items()}


def _value(q) -> float:
    return float(getattr(q, "value", q))


def split_tangent(frame: TangentFrame, w):
    """Closed-form V-component and V^perp-component of ``w``.

    Works for point vectors and for jet vectors alike.
    """
    Y, Yu, Yv, N = frame.Y, frame.Y_u, frame.Y_v, frame.N
    tangent = (
        Y * (-w.inner(N))
        - N * w.inner(Y)
        + Yu * (2.0 * w.inner(Yv))
        + Yv * (2.0 * w.inner(Yu))
    )
    return tangent, w - tangent


def project_frame(frame, w: PseudoVector, tol: float = FRAME_TOL) -> Tuple[PseudoVector, PseudoVector]:
    """Split ``w`` into its components along V = Span{Y, Y_u, Y_v, N} and V^perp.

    ``frame`` is a TangentFrame or anything exposing ``tangent_frame()``.
    """
    if hasattr(frame, "tangent_frame"):
        frame = frame.tangent_frame()
    residuals = frame.normalization_residuals()
    worst = max(residuals.values())
    if worst > tol:
        name = max(residuals, key=residuals.get)
        raise InvalidFrameError(f"invalid frame: {name} residual {worst:.3g}")
    return split_tangent(frame, w)


# ---------------------------------------------------------------------------
# Indefinite Gram-Schmidt
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class OrthonormalBasis:
    vectors: List[Any]
    signs: List[int]

    def gram(self) -> np.ndarray:
        return np.array([[_value(a.inner(b)) for b in self.vectors] for a in self.vectors])


def gram_schmidt_indefinite(
    vectors: Sequence[Any],
    eps_pivot: float = EPS_PIVOT,
    keep: Optional[int] = None,
) -> OrthonormalBasis:
    """Pivoted Gram-Schmidt for an indefinite form.

    At every step the remaining candidate with the largest |<v, v>| is
    normalized first; the output keeps the input slot order.  Works for
    PseudoVector and JetVector inputs.  With ``keep`` set, stops after that
    many vectors instead of requiring the full set.

    Raises:
        DegenerateSubspaceError: every remaining pivot is below ``eps_pivot``.
    """
    remaining = {slot: v for slot, v in enumerate(vectors)}
    target = len(remaining) if keep is None else keep
    chosen: dict = {}
    signs: dict = {}
    while len(chosen) < target:
        if not remaining:
            raise DegenerateSubspaceError()
        quads = {slot: v.inner(v) for slot, v in remaining.items()}
        slot = max(quads, key=lambda s: (abs(_value(quads[s])), -s))
        q = quads[slot]
        scale = max(1.0, remaining[slot].value.sup_norm() ** 2)
        if abs(_value(q)) <= eps_pivot * scale:
            raise DegenerateSubspaceError()
        sign = 1 if _value(q) > 0 else -1
        e = remaining.pop(slot) * ((sign * q) ** -0.5)
        chosen[slot] = e
        signs[slot] = sign
        for other, v in remaining.items():
            remaining[other] = v - e * (sign * v.inner(e))
    order = sorted(chosen)
    return OrthonormalBasis([chosen[s] for s in order], [signs[s] for s in order])


def orthogonal_complement(
    basis: OrthonormalBasis, signature: MetricSignature = AMBIENT
) -> OrthonormalBasis:
    """Orthonormal basis of the complement of a nondegenerate orthonormal set."""
    G = signature.gram
    if basis.vectors:
        rows = np.array([v.coords for v in basis.vectors]) @ G
        _, svals, vt = np.linalg.svd(rows)
        rank = int(np.sum(svals > EPS_PIVOT))
        null = vt[rank:].T
    else:
        null = np.eye(signature.dimension)
    if null.shape[1] == 0:
        return OrthonormalBasis([], [])
    restricted = null.T @ G @ null
    evals, evecs = np.linalg.eigh(restricted)
    if np.min(np.abs(evals)) <= EPS_PIVOT:
        raise DegenerateSubspaceError()
    vectors, signs = [], []
    for lam, vec in sorted(zip(evals, evecs.T), key=lambda t: -t[0]):
        coords = null @ vec / np.sqrt(abs(lam))
        vectors.append(PseudoVector(coords, signature))
        signs.append(1 if lam > 0 else -1)
    return OrthonormalBasis(vectors, signs)


# ---------------------------------------------------------------------------
# Normalizing transforms in O(p, q)
# ---------------------------------------------------------------------------

class CausalType(str, Enum):
    NULL = "null"
    TIMELIKE = "timelike"
    SPACELIKE = "spacelike"


class TransformTarget(str, Enum):
    NULL_INFINITY = "NullInfinity"
    DE_SITTER_POLE = "DeSitterPole"
    ANTI_DE_SITTER_POLE = "AntiDeSitterPole"


_TARGETS = {
    CausalType.NULL: TransformTarget.NULL_INFINITY,
    CausalType.TIMELIKE: TransformTarget.DE_SITTER_POLE,
    CausalType.SPACELIKE: TransformTarget.ANTI_DE_SITTER_POLE,
}


@dataclasses.dataclass(frozen=True, eq=False)
class NormalizingTransform:
    matrix: np.ndarray
    target_label: TransformTarget
    signature: MetricSignature = AMBIENT

    def apply(self, x: PseudoVector) -> PseudoVector:
        return PseudoVector(self.matrix @ x.coords, x.signature)

    def apply_array(self, coords: np.ndarray) -> np.ndarray:
        """Apply to the last axis of an array of coordinates."""
        return coords @ self.matrix.T

    def metric_residual(self) -> float:
        G = self.signature.gram
        return float(np.max(np.abs(self.matrix.T @ G @ self.matrix - G)))


def causal_type(x: PseudoVector, eps: float = EPS_CAUSAL) -> CausalType:
    q = x.self_inner()
    if abs(q) <= eps * max(1.0, x.sup_norm() ** 2):
        return CausalType.NULL
    return CausalType.TIMELIKE if q < 0 else CausalType.SPACELIKE


def normalizing_transform(
    Y0: PseudoVector,
    causal: CausalType,
    eps_causal: float = EPS_CAUSAL,
) -> NormalizingTransform:
    """T in O(3,2) sending Y0 to a multiple of (1,0,0,0,1), (0,0,0,0,1) or (1,0,0,0,0).

    Raises:
        CausalTypeError: ``causal`` disagrees with the sign of <Y0, Y0>.
        DegenerateSubspaceError: the basis extension fails.
    """
    causal = CausalType(causal)
    sig = Y0.signature
    if sig != AMBIENT:
        raise SignatureMismatchError(f"normalizing transforms need signature {AMBIENT}, got {sig}")
    observed = causal_type(Y0, eps_causal)
    if observed != causal:
        raise CausalTypeError(
            f"causal type mismatch: requested {causal.value}, <Y0,Y0> gives {observed.value}"
        )

    if causal is CausalType.NULL:
        # hyperbolic pair (e, f) with Y0 proportional to e + f
        z = PseudoVector(Y0.coords * sig.diag, sig)
        Z = z - Y0 * (z.self_inner() / (2.0 * Y0.inner(z)))
        beta = Y0.inner(Z)
        e = (Y0 + Z) / np.sqrt(2.0 * beta)
        f = (Y0 - Z) / np.sqrt(2.0 * beta)
        e = e / np.sqrt(e.self_inner())
        f = f - e * f.inner(e)
        f = f / np.sqrt(-f.self_inner())
        head = OrthonormalBasis([e, f], [1, -1])
        first_positive, last_negative = [e], [f]
    else:
        w = Y0 / np.sqrt(abs(Y0.self_inner()))
        sign = -1 if causal is CausalType.TIMELIKE else 1
        head = OrthonormalBasis([w], [sign])
        first_positive = [w] if sign > 0 else []
        last_negative = [w] if sign < 0 else []

    rest = orthogonal_complement(head, sig)
    positives = first_positive + [v for v, s in zip(rest.vectors, rest.signs) if s > 0]
    negatives = [v for v, s in zip(rest.vectors, rest.signs) if s < 0] + last_negative
    if len(positives) != sig.positives or len(negatives) != sig.negatives:
        raise DegenerateSubspaceError()

    B = np.column_stack([v.coords for v in positives + negatives])
    G = sig.gram
    T = G @ B.T @ G
    transform = NormalizingTransform(T, _TARGETS[causal], sig)
    residual = transform.metric_residual()
    if residual > TRANSFORM_TOL:
        raise DegenerateSubspaceError(f"degenerate subspace: metric residual {residual:.3g}")
    logger.debug("Normalizing transform for %s Y0, metric residual %.2e", causal.value, residual)
    return transform
