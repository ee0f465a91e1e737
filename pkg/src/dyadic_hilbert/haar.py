"""Tensor Haar analysis and synthesis on the ``2**n x 2**n`` dyadic grid.

Arrays are indexed ``[cy, cx]``: rows run along y, columns along x.  One-
dimensional coefficients use the packed layout: slot 0 holds the mean and
slots ``2**l .. 2**(l+1) - 1`` hold the level-``l`` Haar coefficients in
index order.  Under this layout the 2D transform is a ``2**n x 2**n`` array
``packed[y_slot, x_slot]`` whose blocks are

* ``packed[0, 0]``: the constant term,
* ``packed[0, 1:]``: ``<f, h_I (x) 1>``,
* ``packed[1:, 0]``: ``<f, 1 (x) h_J>``,
* ``packed[1:, 1:]``: ``<f, h_I (x) h_J>``.

The Haar function of ``I`` is ``|I|**-0.5`` on the left half and
``-|I|**-0.5`` on the right half (``sign=+1``); ``sign=-1`` flips every one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DomainError, DyadicInterval

MAX_RESOLUTION = 14


def _resolution_of(size: int) -> int:
    n = size.bit_length() - 1
    if size < 1 or (1 << n) != size:
        raise DomainError(f"grid side {size} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise-constant function on the unit square, one value per cell."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DomainError(f"expected a square 2D grid, got shape {values.shape}")
        n = _resolution_of(values.shape[0])
        if n > MAX_RESOLUTION:
            raise DomainError(f"resolution {n} exceeds {MAX_RESOLUTION}")
        if not np.all(np.isfinite(values)):
            raise DomainError("grid values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0].bit_length() - 1

    @classmethod
    def zeros(cls, n: int) -> GridFunction:
        return cls(np.zeros((1 << n, 1 << n)))

    def inner(self, other: GridFunction) -> float:
        """``<f, g>`` as the exact integral over the unit square."""
        _check_same(self.n, other.n)
        return float(np.sum(self.values * other.values)) / 4.0 ** self.n

    def norm2(self) -> float:
        return math.sqrt(self.inner(self))

    def __add__(self, other: GridFunction) -> GridFunction:
        _check_same(self.n, other.n)
        return GridFunction(self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        _check_same(self.n, other.n)
        return GridFunction(self.values - other.values)

    def __mul__(self, alpha: float) -> GridFunction:
        return GridFunction(alpha * self.values)

    __rmul__ = __mul__

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "values": self.values.ravel().tolist()})

    @classmethod
    def from_json(cls, text: str) -> GridFunction:
        doc = json.loads(text)
        try:
            n = int(doc["n"])
            flat = np.asarray(doc["values"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed grid function document: {exc}") from exc
        if flat.shape != (4 ** n,):
            raise DomainError(f"expected {4 ** n} values for n={n}, got {flat.size}")
        return cls(flat.reshape(1 << n, 1 << n))


def _check_same(n1: int, n2: int) -> None:
    if n1 != n2:
        raise DomainError(f"resolution mismatch: {n1} vs {n2}")


def slot_levels(n: int) -> np.ndarray:
    """Haar level of each packed slot; -1 marks the mean slot."""
    lev = np.full(1 << n, -1, dtype=np.int64)
    for level in range(n):
        lev[1 << level:2 << level] = level
    return lev


def haar_1d(a: np.ndarray, axis: int = -1, sign: int = 1) -> np.ndarray:
    """Packed 1D Haar coefficients of cell values ``a`` along ``axis``."""
    a = np.moveaxis(np.asarray(a, dtype=np.float64), axis, -1)
    size = a.shape[-1]
    n = _resolution_of(size)
    out = np.empty_like(a)
    cur = a
    for level in range(n - 1, -1, -1):
        pairs = cur.reshape(cur.shape[:-1] + (1 << level, 2))
        left, right = pairs[..., 0], pairs[..., 1]
        out[..., 1 << level:2 << level] = (sign * 0.5 * 2.0 ** (-level / 2)) * (left - right)
        cur = 0.5 * (left + right)
    out[..., 0] = cur[..., 0]
    return np.moveaxis(out, -1, axis)


def inverse_haar_1d(c: np.ndarray, axis: int = -1, sign: int = 1) -> np.ndarray:
    c = np.moveaxis(np.asarray(c, dtype=np.float64), axis, -1)
    n = _resolution_of(c.shape[-1])
    cur = c[..., :1]
    for level in range(n):
        d = (sign * 2.0 ** (level / 2)) * c[..., 1 << level:2 << level]
        nxt = np.empty(cur.shape[:-1] + (2 << level,))
        nxt[..., 0::2] = cur + d
        nxt[..., 1::2] = cur - d
        cur = nxt
    return np.moveaxis(cur, -1, axis)


@dataclass(frozen=True, eq=False)
class HaarCoefficients:
    """Full tensor Haar expansion, stored in the packed 2D layout."""

    packed: np.ndarray

    @property
    def n(self) -> int:
        return self.packed.shape[0].bit_length() - 1

    @property
    def dc(self) -> float:
        return float(self.packed[0, 0])

    def xonly(self, i: int) -> np.ndarray:
        """``<f, h_I (x) 1>`` for the level-``i`` intervals, by index."""
        self._check_level(i)
        return self.packed[0, 1 << i:2 << i]

    def yonly(self, j: int) -> np.ndarray:
        self._check_level(j)
        return self.packed[1 << j:2 << j, 0]

    def tensor(self, i: int, j: int) -> np.ndarray:
        """Block of ``<f, h_I (x) h_J>`` with ``|I| = 2**-i``, ``|J| = 2**-j``.

        Indexed ``[index(J), index(I)]``, matching the grid orientation.
        """
        self._check_level(i)
        self._check_level(j)
        return self.packed[1 << j:2 << j, 1 << i:2 << i]

    def coefficient(self, I: DyadicInterval, J: DyadicInterval) -> float:
        return float(self.tensor(I.level, J.level)[J.index, I.index])

    def energy(self) -> float:
        return float(np.sum(self.packed ** 2))

    def _check_level(self, level: int) -> None:
        if not 0 <= level < self.n:
            raise DomainError(f"Haar level {level} out of range 0..{self.n - 1}")


def forward_haar_2d(f: GridFunction, sign: int = 1) -> HaarCoefficients:
    packed = haar_1d(haar_1d(f.values, axis=1, sign=sign), axis=0, sign=sign)
    return HaarCoefficients(packed)


def inverse_haar_2d(c: HaarCoefficients, sign: int = 1) -> GridFunction:
    values = inverse_haar_1d(inverse_haar_1d(c.packed, axis=0, sign=sign), axis=1, sign=sign)
    return GridFunction(values)


def scale_pair_component(c: HaarCoefficients, i: int, j: int) -> GridFunction:
    """Sum of the tensor terms with ``|I| = 2**-i`` and ``|J| = 2**-j``."""
    block = c.tensor(i, j)
    packed = np.zeros_like(c.packed)
    packed[1 << j:2 << j, 1 << i:2 << i] = block
    return inverse_haar_2d(HaarCoefficients(packed))


def non_tensor_component(c: HaarCoefficients) -> GridFunction:
    """The constant, x-only and y-only part of the expansion."""
    packed = np.zeros_like(c.packed)
    packed[0, :] = c.packed[0, :]
    packed[:, 0] = c.packed[:, 0]
    return inverse_haar_2d(HaarCoefficients(packed))


def antidiagonal_mask(n: int, t: int) -> np.ndarray:
    """Tensor slots whose levels satisfy ``level(J) - level(I) == t``."""
    lev = slot_levels(n)
    tensor = (lev[:, None] >= 0) & (lev[None, :] >= 0)
    return tensor & (lev[:, None] - lev[None, :] == t)


def antidiagonal_components(c: HaarCoefficients, sign: int = 1) -> list[np.ndarray]:
    """``sum_{j - i = t} Delta_{i,j} f`` as cell arrays, for ``t = 0..n-1``."""
    n = c.n
    out = []
    for t in range(n):
        packed = np.where(antidiagonal_mask(n, t), c.packed, 0.0)
        out.append(inverse_haar_2d(HaarCoefficients(packed), sign=sign).values)
    return out


def diagonal_partial_sums(c: HaarCoefficients, sign: int = 1) -> list[GridFunction]:
    """``D_0, ..., D_n`` where ``D_k`` keeps the tensor terms with ``j - i >= k``.

    Accumulated from ``D_n = 0`` downward, one synthesis per anti-diagonal.
    """
    n = c.n
    acc = np.zeros((1 << n, 1 << n))
    sums = [GridFunction(acc)]
    for comp in reversed(antidiagonal_components(c, sign=sign)):
        acc = acc + comp
        sums.append(GridFunction(acc))
    sums.reverse()
    return sums
