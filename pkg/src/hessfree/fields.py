"""Multiarray fields over a grid index set, with a real scalar product.

A ``Field`` is a d-dimensional array of either real or complex scalars,
treated as an element of a real inner-product space: for complex entries
the scalar product is the real part of the usual Hermitian one.  All
operations are pure and return new fields; the underlying storage is
frozen after construction so fields can be shared across workers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

_REAL_DTYPE = np.float64
_COMPLEX_DTYPE = np.complex128

_BLOB_MAGIC = b"FLD1"


class DimensionError(ValueError):
    """Shape or scalar-kind mismatch between fields."""


@dataclass(frozen=True)
class Field:
    """Immutable real- or complex-valued multiarray."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if np.iscomplexobj(arr):
            arr = arr.astype(_COMPLEX_DTYPE, copy=False)
        else:
            arr = arr.astype(_REAL_DTYPE, copy=False)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    # real dimension of the field viewed as a real inner-product space
    @property
    def real_dim(self) -> int:
        return self.data.size * (2 if self.is_complex else 1)

    def __add__(self, other: "Field") -> "Field":
        _check_conformable(self, other)
        return Field(self.data + other.data)

    def __sub__(self, other: "Field") -> "Field":
        _check_conformable(self, other)
        return Field(self.data - other.data)

    def __mul__(self, a: float) -> "Field":
        return Field(self.data * float(a))

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field(-self.data)


def _check_conformable(x: Field, y: Field) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.is_complex != y.is_complex:
        raise DimensionError("scalar kind mismatch (real vs complex)")


def from_array(a: np.ndarray | Sequence[float]) -> Field:
    return Field(np.asarray(a))


def zeros(shape: Sequence[int], complex_kind: bool = False) -> Field:
    dtype = _COMPLEX_DTYPE if complex_kind else _REAL_DTYPE
    return Field(np.zeros(tuple(shape), dtype=dtype))


def zeros_like(x: Field) -> Field:
    return Field(np.zeros_like(x.data))


def ones_like(x: Field) -> Field:
    return Field(np.ones_like(x.data))


def inner(x: Field, y: Field) -> float:
    """Real scalar product: Re of the Hermitian inner product."""
    _check_conformable(x, y)
    s = np.vdot(y.data, x.data)  # sum x * conj(y)
    return float(np.real(s))


def norm(x: Field) -> float:
    return float(np.linalg.norm(x.data.ravel()))


def axpy(a: float, x: Field, y: Field) -> Field:
    """a*x + y, elementwise."""
    _check_conformable(x, y)
    return Field(float(a) * x.data + y.data)


def hadamard(x: Field, y: Field) -> Field:
    _check_conformable(x, y)
    return Field(x.data * y.data)


def pointwise(x: Field, fn: Callable[[np.ndarray], np.ndarray]) -> Field:
    out = np.asarray(fn(x.data))
    if out.shape != x.shape:
        raise DimensionError("pointwise map changed the field shape")
    return Field(out)


def to_bytes(x: Field) -> bytes:
    """Serialize to a little-endian blob: magic, kind, ndim, extents, data."""
    kind = 1 if x.is_complex else 0
    head = _BLOB_MAGIC + struct.pack("<BI", kind, x.data.ndim)
    head += struct.pack(f"<{x.data.ndim}Q", *x.shape)
    return head + x.data.astype("<c16" if kind else "<f8").tobytes()


def from_bytes(blob: bytes) -> Field:
    if blob[:4] != _BLOB_MAGIC:
        raise ValueError("not a field blob")
    kind, ndim = struct.unpack_from("<BI", blob, 4)
    off = 4 + 5
    shape = struct.unpack_from(f"<{ndim}Q", blob, off)
    off += 8 * ndim
    dtype = np.dtype("<c16") if kind else np.dtype("<f8")
    n = int(np.prod(shape)) if ndim else 1
    data = np.frombuffer(blob, dtype=dtype, count=n, offset=off)
    return Field(data.reshape(shape).copy())
