"""Dense tensors and the four primitive operations.

A :class:`DenseTensor` is a value: a shape plus a flat complex vector whose
elements are linearized first-index-fastest (column-major). For a rank-3 tensor
of shape ``(w_x, w_y, w_z)`` the element ``(x, y, z)`` (0-based) sits at flat
position ``x + w_x*(y + w_y*z)`` — all values of ``x`` are enumerated before
``y`` advances. Everything else in the package (state vectors, fused link
indices, dense operators) follows the same convention: site/axis 0 is the
fastest index.

The four primitives:

* ``reshape``  — metadata-only, O(1), shares the underlying buffer;
* ``permute``  — eager physical copy into the new linearization;
* ``contract`` — pairwise contraction by permute + reshape + matrix product
  (a jitted direct-summation kernel takes over for small operands);
* ``decompose`` — lives in :mod:`tnkit.decomp` (SVD / Hermitian eig).

``kron`` and ``direct_sum`` combine operators on product spaces; they are
defined on matrices only.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

import numpy as np

from . import backend
from .errors import (
    ElementCountMismatch,
    ExtentMismatch,
    InvalidAxis,
    InvalidPermutation,
    RankUnsupported,
)

# Below this analytic flop count the direct kernel beats permute+BLAS overhead;
# measured crossover sits between 2^6 and 3^6 flops (see benchmarks/).
_DIRECT_KERNEL_FLOP_LIMIT = 512


def _as_shape(shape: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(s) for s in shape)
    for s in out:
        if s < 1:
            raise ExtentMismatch(f"extents must be >= 1, got {out}")
    return out


class DenseTensor:
    """Immutable dense tensor with column-major flat storage.

    Parameters
    ----------
    shape : sequence of int
        Extent of each index; every extent is at least 1. ``()`` is a scalar.
    data : array-like
        Flat data of length ``prod(shape)`` in first-index-fastest order.
    """

    __slots__ = ("_shape", "_data")

    def __init__(self, shape: Sequence[int], data) -> None:
        self._shape = _as_shape(shape)
        flat = np.asarray(data, dtype=np.complex128).reshape(-1)
        if flat.size != self.size:
            raise ElementCountMismatch(
                f"shape {self._shape} holds {self.size} elements, data has {flat.size}"
            )
        flat = np.ascontiguousarray(flat)
        flat.setflags(write=False)
        self._data = flat

    # -- constructors --------------------------------------------------

    @classmethod
    def _wrap(cls, shape: tuple[int, ...], flat: np.ndarray) -> "DenseTensor":
        """Internal: adopt an owned complex128 buffer without copying."""
        t = cls.__new__(cls)
        t._shape = shape
        flat.setflags(write=False)
        t._data = flat
        return t

    @classmethod
    def from_ndarray(cls, arr) -> "DenseTensor":
        """Build from an n-dimensional array (its axis order is preserved)."""
        a = np.asarray(arr, dtype=np.complex128)
        return cls._wrap(a.shape, a.ravel(order="F").copy())

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "DenseTensor":
        shp = _as_shape(shape)
        return cls._wrap(shp, np.zeros(math.prod(shp), dtype=np.complex128))

    @classmethod
    def scalar(cls, value) -> "DenseTensor":
        return cls._wrap((), np.array([value], dtype=np.complex128))

    # -- basic properties ----------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self._shape

    @property
    def rank(self) -> int:
        return len(self._shape)

    @property
    def size(self) -> int:
        return math.prod(self._shape)

    @property
    def data(self) -> np.ndarray:
        """The flat, read-only complex128 buffer (Table-ordered)."""
        return self._data

    def __getitem__(self, multi_index) -> complex:
        if np.isscalar(multi_index):
            multi_index = (multi_index,)
        idx = tuple(int(i) for i in multi_index)
        if len(idx) != self.rank:
            raise InvalidAxis(f"expected {self.rank} indices, got {len(idx)}")
        flat = 0
        weight = 1
        for i, w in zip(idx, self._shape):
            if not 0 <= i < w:
                raise InvalidAxis(f"index {idx} out of bounds for shape {self._shape}")
            flat += i * weight
            weight *= w
        return complex(self._data[flat])

    def to_ndarray(self) -> np.ndarray:
        """Read-only n-dimensional view of the data (no copy)."""
        return self._data.reshape(self._shape, order="F")

    def conj(self) -> "DenseTensor":
        return DenseTensor._wrap(self._shape, np.conj(self._data))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"DenseTensor(shape={self._shape})"

    # -- debug dump ------------------------------------------------------

    def dump(self) -> str:
        """JSON debug dump: {shape, data_re, data_im} in flat linear order."""
        return json.dumps(
            {
                "shape": list(self._shape),
                "data_re": self._data.real.tolist(),
                "data_im": self._data.imag.tolist(),
            }
        )

    @classmethod
    def load(cls, text: str) -> "DenseTensor":
        obj = json.loads(text)
        flat = np.asarray(obj["data_re"], dtype=np.float64) + 1j * np.asarray(
            obj["data_im"], dtype=np.float64
        )
        return cls(tuple(obj["shape"]), flat)


def scale(t: DenseTensor, alpha) -> DenseTensor:
    """Multiply every element by the scalar ``alpha``."""
    return DenseTensor._wrap(t.shape, t.data * complex(alpha))


def add(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Elementwise sum; shapes must match exactly."""
    if a.shape != b.shape:
        raise ExtentMismatch(f"cannot add shapes {a.shape} and {b.shape}")
    return DenseTensor._wrap(a.shape, a.data + b.data)


def frobenius_norm(t: DenseTensor) -> float:
    """sqrt(sum |t_i|^2) over all elements."""
    return float(np.linalg.norm(t.data))


def reshape(t: DenseTensor, new_shape: Sequence[int]) -> DenseTensor:
    """Regroup indices without touching data (O(1), buffer shared).

    The flat element order is the linearization order, so e.g. a
    ``(10, 5, 20)`` tensor reshapes to ``(2, 5, 5, 10, 2)`` with the identical
    data vector.
    """
    shp = _as_shape(new_shape)
    if math.prod(shp) != t.size:
        raise ElementCountMismatch(
            f"cannot reshape {t.shape} ({t.size} elements) to {shp} ({math.prod(shp)})"
        )
    return DenseTensor._wrap(shp, t.data)


def permute(t: DenseTensor, perm: Sequence[int]) -> DenseTensor:
    """Reorder indices with an eager physical copy.

    ``out`` satisfies ``out[i_perm[0], i_perm[1], ...] == t[i_0, i_1, ...]``;
    axis ``k`` of the output is axis ``perm[k]`` of the input. For example
    ``perm=(3, 0, 1, 2)`` on a rank-4 tensor makes the fourth index the first.
    """
    p = tuple(int(x) for x in perm)
    if sorted(p) != list(range(t.rank)):
        raise InvalidPermutation(f"{p} is not a permutation of 0..{t.rank - 1}")
    arr = np.transpose(t.to_ndarray(), p)
    return DenseTensor._wrap(arr.shape, arr.ravel(order="F"))


def _check_axes(t: DenseTensor, axes: Sequence[int], name: str) -> tuple[int, ...]:
    ax = tuple(int(a) for a in axes)
    seen = set()
    for a in ax:
        if not 0 <= a < t.rank:
            raise InvalidAxis(f"{name}: axis {a} out of range for rank {t.rank}")
        if a in seen:
            raise InvalidAxis(f"{name}: axis {a} repeated")
        seen.add(a)
    return ax


def contract_flops(
    a: DenseTensor, axes_a: Sequence[int], b: DenseTensor, axes_b: Sequence[int]
) -> int:
    """Analytic cost model: the product of all distinct index extents.

    Open indices of both operands and each contracted pair (counted once)
    contribute one factor each — e.g. contracting a rank-4 with a rank-5
    tensor over two shared indices of extent chi costs chi**7. This is a
    model, not a wall-time measurement.
    """
    ax_a = _check_axes(a, axes_a, "axes_a")
    ax_b = _check_axes(b, axes_b, "axes_b")
    if len(ax_a) != len(ax_b):
        raise InvalidAxis(f"axis lists differ in length: {len(ax_a)} vs {len(ax_b)}")
    for pa, pb in zip(ax_a, ax_b):
        if a.shape[pa] != b.shape[pb]:
            raise ExtentMismatch(
                f"contracted axes {pa},{pb} have extents {a.shape[pa]} != {b.shape[pb]}"
            )
    cost = 1
    for i in range(a.rank):
        cost *= a.shape[i]
    for i in range(b.rank):
        if i not in ax_b:
            cost *= b.shape[i]
    return cost


def contract(
    a: DenseTensor, axes_a: Sequence[int], b: DenseTensor, axes_b: Sequence[int]
) -> DenseTensor:
    """Contract paired axes of two tensors.

    ``axes_a[k]`` of ``a`` is summed against ``axes_b[k]`` of ``b``; paired
    extents must match. The result carries the remaining axes of ``a`` (in
    their original order) followed by the remaining axes of ``b``. With empty
    axis lists this is the outer product.

    The reduction runs as permute -> reshape -> matrix product -> reshape;
    small contractions dispatch to a direct nested-loop kernel (numba) when
    enabled — both routes agree up to floating-point reassociation.
    """
    ax_a = _check_axes(a, axes_a, "axes_a")
    ax_b = _check_axes(b, axes_b, "axes_b")
    if len(ax_a) != len(ax_b):
        raise InvalidAxis(f"axis lists differ in length: {len(ax_a)} vs {len(ax_b)}")
    for pa, pb in zip(ax_a, ax_b):
        if a.shape[pa] != b.shape[pb]:
            raise ExtentMismatch(
                f"contracted axes {pa},{pb} have extents {a.shape[pa]} != {b.shape[pb]}"
            )

    free_a = tuple(i for i in range(a.rank) if i not in ax_a)
    free_b = tuple(i for i in range(b.rank) if i not in ax_b)
    out_shape = tuple(a.shape[i] for i in free_a) + tuple(b.shape[i] for i in free_b)

    if (
        backend.numba_enabled()
        and len(ax_a) > 0
        and contract_flops(a, ax_a, b, ax_b) <= _DIRECT_KERNEL_FLOP_LIMIT
    ):
        return _contract_direct(a, ax_a, free_a, b, ax_b, free_b, out_shape)

    m = math.prod(a.shape[i] for i in free_a)
    k = math.prod(a.shape[i] for i in ax_a)
    n = math.prod(b.shape[i] for i in free_b)
    left = permute(a, free_a + ax_a)
    right = permute(b, ax_b + free_b)
    prod = reshape(left, (m, k)).to_ndarray() @ reshape(right, (k, n)).to_ndarray()
    return DenseTensor._wrap(out_shape, prod.ravel(order="F"))


def _fortran_strides(shape: tuple[int, ...]) -> list[int]:
    strides = []
    w = 1
    for s in shape:
        strides.append(w)
        w *= s
    return strides


def _contract_direct(a, ax_a, free_a, b, ax_b, free_b, out_shape) -> DenseTensor:
    sa = _fortran_strides(a.shape)
    sb = _fortran_strides(b.shape)
    open_extents = np.array(
        [a.shape[i] for i in free_a] + [b.shape[i] for i in free_b], dtype=np.int64
    )
    con_extents = np.array([a.shape[i] for i in ax_a], dtype=np.int64)
    out = np.zeros(math.prod(out_shape) if out_shape else 1, dtype=np.complex128)
    backend.contract_direct(
        a.data,
        b.data,
        out,
        np.array([sa[i] for i in free_a], dtype=np.int64),
        np.array([sb[i] for i in free_b], dtype=np.int64),
        np.array([sa[i] for i in ax_a], dtype=np.int64),
        np.array([sb[i] for i in ax_b], dtype=np.int64),
        open_extents,
        con_extents,
        len(free_a),
    )
    return DenseTensor._wrap(out_shape, out)


def kron(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Kronecker product of two matrices (or two vectors).

    For matrices the result has the familiar block structure
    ``[[a00*B, a01*B, ...], [a10*B, ...], ...]``; its row index runs over
    ``(i_a, i_b)`` with the *second* factor's index fastest, so the product of
    single-site basis vectors enumerates pair states in the order
    (00, 01, 10, 11).
    """
    if a.rank != b.rank or a.rank not in (1, 2):
        raise RankUnsupported(
            f"kron defined for two vectors or two matrices, got ranks {a.rank}, {b.rank}"
        )
    return DenseTensor.from_ndarray(np.kron(a.to_ndarray(), b.to_ndarray()))


def direct_sum(a: DenseTensor, b: DenseTensor) -> DenseTensor:
    """Block-diagonal direct sum of two matrices: diag(A, B)."""
    if a.rank != 2 or b.rank != 2:
        raise RankUnsupported(
            f"direct_sum defined for matrices, got ranks {a.rank}, {b.rank}"
        )
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra + rb, ca + cb), dtype=np.complex128)
    out[:ra, :ca] = a.to_ndarray()
    out[ra:, ca:] = b.to_ndarray()
    return DenseTensor.from_ndarray(out)
