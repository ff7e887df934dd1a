# core/services/codec.py
"""
Matrix partitioning and MDS (polynomial / Vandermonde) encoding and decoding.

Encoded block j of a code with evaluation points x_1..x_n is
    sum_i parts[i] * x_j ** (i - 1)
so any k encoded blocks determine the k parts through a k x k Vandermonde
solve. Arithmetic is either over the reals (numpy, float64) or exact over a
prime field (galois). Every function here is pure.
"""
import enum
import functools
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import galois
import numpy as np

from core.exceptions import IllConditionedWarning, InvalidParameterError

logger = logging.getLogger(__name__)

DEFAULT_PRIME = 2**31 - 1
RCOND_WARN_THRESHOLD = 1e-10


class FieldKind(str, enum.Enum):
    REAL = "real"
    PRIME = "prime"


class EvalPoints(str, enum.Enum):
    INTEGER = "integer"
    CHEBYSHEV = "chebyshev"
    AUTO = "auto"


@functools.lru_cache(maxsize=None)
def _galois_field(p: int):
    return galois.GF(p)


@dataclass(frozen=True)
class Field:
    kind: FieldKind = FieldKind.REAL
    prime: int = DEFAULT_PRIME

    def __post_init__(self):
        if self.kind == FieldKind.PRIME and not galois.is_prime(self.prime):
            raise InvalidParameterError(f"field modulus {self.prime} is not prime")

    @classmethod
    def real(cls) -> "Field":
        return cls(FieldKind.REAL)

    @classmethod
    def prime_field(cls, p: int = DEFAULT_PRIME) -> "Field":
        return cls(FieldKind.PRIME, p)

    @property
    def is_prime(self) -> bool:
        return self.kind == FieldKind.PRIME

    @property
    def gf(self):
        return _galois_field(self.prime)

    def __str__(self):
        return f"GF({self.prime})" if self.is_prime else "R"


@dataclass(frozen=True)
class MatrixDims:
    u: int
    w: int
    v: int

    def __post_init__(self):
        if min(self.u, self.w, self.v) < 1:
            raise InvalidParameterError(f"matrix dimensions must be positive, got {self.as_tuple()}")

    def as_tuple(self):
        return (self.u, self.w, self.v)

    @property
    def product_ops(self) -> int:
        return self.u * self.w * self.v


@dataclass(frozen=True)
class Partition:
    parts: tuple
    pad_rows: int

    @property
    def k(self) -> int:
        return len(self.parts)

    @property
    def part_shape(self):
        return self.parts[0].shape


@dataclass(frozen=True)
class EncodedBlock:
    index: int  # 1-based codeword position
    data: np.ndarray


@dataclass(frozen=True)
class DecodeCost:
    solve_size: int
    reconstruction_ops: int
    rcond: Optional[float] = None


def chebyshev_points(n: int) -> tuple:
    j = np.arange(1, n + 1)
    return tuple(float(x) for x in np.cos((2 * j - 1) * np.pi / (2 * n)))


def resolve_points(family: Union[EvalPoints, str], k: int, field: Field) -> EvalPoints:
    family = EvalPoints(family)
    if family != EvalPoints.AUTO:
        return family
    # integer points stay usable for tiny k only
    if field.is_prime or k <= 2:
        return EvalPoints.INTEGER
    return EvalPoints.CHEBYSHEV


@dataclass(frozen=True)
class MdsCode:
    k: int
    n: int
    field: Field
    eval_points: tuple

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise InvalidParameterError(f"MDS code needs 1 <= k <= n, got k={self.k} n={self.n}")
        if len(self.eval_points) != self.n:
            raise InvalidParameterError("one evaluation point per codeword position is required")
        if self.field.is_prime:
            if self.n >= self.field.prime:
                raise InvalidParameterError(f"n={self.n} must be below the field modulus {self.field.prime}")
            pts = [int(x) % self.field.prime for x in self.eval_points]
        else:
            pts = list(self.eval_points)
        if len(set(pts)) != len(pts):
            raise InvalidParameterError("evaluation points must be pairwise distinct")

    @classmethod
    def build(
        cls,
        k: int,
        n: int,
        field: Optional[Field] = None,
        points: Union[EvalPoints, str] = EvalPoints.AUTO,
    ) -> "MdsCode":
        field = field or Field.real()
        family = resolve_points(points, k, field)
        if family == EvalPoints.CHEBYSHEV:
            if field.is_prime:
                raise InvalidParameterError("Chebyshev points exist only over the reals")
            return cls(k, n, field, chebyshev_points(n))
        return cls(k, n, field, tuple(range(1, n + 1)))


# ----------------------------
#  Field element helpers
# ----------------------------

def to_field(matrix, field: Field) -> np.ndarray:
    """Map an integer-valued matrix to canonical field elements in [0, p)."""
    arr = np.asarray(matrix)
    if not np.all(np.mod(arr, 1) == 0):
        raise InvalidParameterError("prime-field mode needs integer-valued matrices")
    return np.mod(arr.astype(np.int64), field.prime)


def from_field(matrix, field: Field) -> np.ndarray:
    """Centered lift of field elements to signed integers."""
    arr = np.asarray(matrix, dtype=np.int64)
    return np.where(arr > field.prime // 2, arr - field.prime, arr)


def _check_field_elements(arr: np.ndarray, field: Field) -> np.ndarray:
    if not np.issubdtype(arr.dtype, np.integer):
        raise InvalidParameterError("prime-field data must already be integer field elements (see to_field)")
    if arr.size and (arr.min() < 0 or arr.max() >= field.prime):
        raise InvalidParameterError(f"prime-field data must lie in [0, {field.prime})")
    return arr.astype(np.int64)


def field_matmul(field: Field, x, y) -> np.ndarray:
    if not field.is_prime:
        return np.asarray(x, dtype=float) @ np.asarray(y, dtype=float)
    gf = field.gf
    x = gf(_check_field_elements(np.asarray(x), field))
    y = gf(_check_field_elements(np.asarray(y), field))
    return (x @ y).view(np.ndarray).astype(np.int64)


def _vandermonde_mod(points: Sequence[int], k: int, p: int) -> np.ndarray:
    x = np.asarray(points, dtype=np.int64) % p
    V = np.empty((len(x), k), dtype=np.int64)
    V[:, 0] = 1
    for i in range(1, k):
        V[:, i] = (V[:, i - 1] * x) % p
    return V


# ----------------------------
#  Operations
# ----------------------------

def partition(A, k: int) -> Partition:
    A = np.asarray(A)
    if A.ndim != 2:
        raise InvalidParameterError("partition expects a 2-D matrix")
    if k < 1:
        raise InvalidParameterError(f"part count must be >= 1, got {k}")
    u = A.shape[0]
    rows = math.ceil(u / k)
    pad = rows * k - u
    if pad:
        A = np.vstack([A, np.zeros((pad, A.shape[1]), dtype=A.dtype)])
    return Partition(parts=tuple(np.split(A, k)), pad_rows=pad)


def unpartition(blocks: Sequence[np.ndarray], pad_rows: int) -> np.ndarray:
    blocks = [np.asarray(b) for b in blocks]
    if not blocks:
        raise InvalidParameterError("unpartition needs at least one block")
    if any(b.shape != blocks[0].shape for b in blocks):
        raise InvalidParameterError("all blocks must share one shape")
    stacked = np.vstack(blocks)
    if pad_rows < 0 or pad_rows >= stacked.shape[0]:
        raise InvalidParameterError(f"pad_rows={pad_rows} out of range for {stacked.shape[0]} rows")
    return stacked[: stacked.shape[0] - pad_rows] if pad_rows else stacked


def encode(p: Partition, code: MdsCode) -> list:
    if code.k != p.k:
        raise InvalidParameterError(f"code expects k={code.k} parts, partition has {p.k}")
    shape = p.part_shape
    stacked = np.stack(p.parts).reshape(p.k, -1)

    if code.field.is_prime:
        gf = code.field.gf
        V = gf(_vandermonde_mod(code.eval_points, code.k, code.field.prime))
        out = (V @ gf(_check_field_elements(stacked, code.field))).view(np.ndarray).astype(np.int64)
    else:
        V = np.vander(np.asarray(code.eval_points, dtype=float), code.k, increasing=True)
        out = V @ stacked.astype(float)

    return [EncodedBlock(index=j + 1, data=out[j].reshape(shape)) for j in range(code.n)]


def _solve_vandermonde_real(x, Y, threshold: float):
    V = np.vander(np.asarray(x, dtype=float), len(x), increasing=True)
    rcond = 1.0 / np.linalg.cond(V)
    if not np.isfinite(rcond) or rcond < threshold:
        logger.warning("ill-conditioned %dx%d Vandermonde solve (rcond=%.3e)", len(x), len(x), rcond)
        warnings.warn(
            f"Vandermonde system of size {len(x)} is ill-conditioned (rcond={rcond:.3e})",
            IllConditionedWarning,
            stacklevel=3,
        )
    return np.linalg.solve(V, Y.astype(float)), float(rcond)


def _solve_vandermonde_prime(x, Y, field: Field):
    # Newton divided differences, then conversion to monomial coefficients
    gf = field.gf
    k = len(x)
    xs = gf(np.asarray(x, dtype=np.int64) % field.prime)
    c = gf(Y.copy())
    for j in range(k - 1):
        c[j + 1:] = (c[j + 1:] - c[j:-1]) / (xs[j + 1:] - xs[: k - j - 1])[:, np.newaxis]
    for j in range(k - 2, -1, -1):
        c[j:-1] = c[j:-1] - xs[j] * c[j + 1:]
    return c.view(np.ndarray).astype(np.int64)


def decode(
    blocks: Iterable[EncodedBlock],
    code: MdsCode,
    received: Optional[Sequence[int]] = None,
    *,
    rcond_threshold: float = RCOND_WARN_THRESHOLD,
):
    """
    Recover the k message blocks from k received encoded results.
    Returns (blocks, DecodeCost). When `received` is omitted the first k
    blocks are used.
    """
    by_index = {}
    order = []
    for b in blocks:
        if b.index in by_index:
            raise InvalidParameterError(f"encoded block {b.index} supplied twice")
        by_index[b.index] = np.asarray(b.data)
        order.append(b.index)

    received = list(received) if received is not None else order[: code.k]
    if len(set(received)) != len(received):
        raise InvalidParameterError(f"repeated indices in received set {received}")
    if len(received) != code.k:
        raise InvalidParameterError(f"decoding needs exactly k={code.k} indices, got {len(received)}")
    for r in received:
        if not 1 <= r <= code.n:
            raise InvalidParameterError(f"index {r} outside codeword positions 1..{code.n}")
        if r not in by_index:
            raise InvalidParameterError(f"no block supplied for index {r}")

    shape = by_index[received[0]].shape
    if any(by_index[r].shape != shape for r in received):
        raise InvalidParameterError("received blocks differ in shape")

    Y = np.stack([by_index[r] for r in received]).reshape(code.k, -1)
    x = [code.eval_points[r - 1] for r in received]

    rcond = None
    if code.field.is_prime:
        coeffs = _solve_vandermonde_prime(x, _check_field_elements(Y, code.field), code.field)
    else:
        coeffs, rcond = _solve_vandermonde_real(x, Y, rcond_threshold)

    rows, cols = shape if len(shape) == 2 else (shape[0], 1)
    cost = DecodeCost(solve_size=code.k, reconstruction_ops=code.k * rows * cols, rcond=rcond)
    return [coeffs[i].reshape(shape) for i in range(code.k)], cost
