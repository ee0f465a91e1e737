"""The dyadic directional Hilbert transform and its companion operators.

At a cell with exponent ``k`` the transform keeps the tensor Haar terms
``<f, h_I (x) h_J> h_I h_J`` of the rectangles through that cell with
``|J| / |I| <= 2**-k``, i.e. ``level(J) - level(I) >= k``.  Only Haar levels
``0..n-1`` exist at resolution ``n``, so ``k = n`` selects nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dyadic import DomainError, DyadicInterval
from .field import DirectionField
from .haar import (
    GridFunction,
    HaarCoefficients,
    antidiagonal_components,
    antidiagonal_mask,
    forward_haar_2d,
    haar_1d,
    inverse_haar_2d,
)


def _check(f: GridFunction, v: DirectionField) -> int:
    if f.n != v.n:
        raise DomainError(f"resolution mismatch: function n={f.n}, field n={v.n}")
    return f.n


def apply_hv(f: GridFunction, v: DirectionField, sign: int = 1) -> GridFunction:
    """``H_{v,D} f``: the partial sum ``D_{k(cell)} f`` read off at every cell.

    Runs the anti-diagonals from ``t = n - 1`` down to 0, keeping a running
    ``D_t`` and latching it into the cells with ``k == t``.
    """
    n = _check(f, v)
    comps = antidiagonal_components(forward_haar_2d(f, sign=sign), sign=sign)
    acc = np.zeros_like(f.values)
    out = np.zeros_like(f.values)
    for t in range(n - 1, -1, -1):
        acc = acc + comps[t]
        out = np.where(v.k == t, acc, out)
    return GridFunction(out)


def apply_hv_adjoint(g: GridFunction, v: DirectionField) -> GridFunction:
    """Transpose of :func:`apply_hv` for the grid inner product.

    ``sum_t P_t (g * 1[k <= t])`` where ``P_t`` projects onto the tensor
    terms with ``level(J) - level(I) == t``.
    """
    n = _check(g, v)
    packed = np.zeros_like(g.values)
    for t in range(n):
        masked = GridFunction(np.where(v.k <= t, g.values, 0.0))
        c = forward_haar_2d(masked).packed
        sel = antidiagonal_mask(n, t)
        packed[sel] = c[sel]
    return inverse_haar_2d(HaarCoefficients(packed))


# -- independent brute-force path -------------------------------------------

SignFn = Callable[[int, int], int]


def haar_vector(level: int, index: int, n: int, sign: int = 1) -> np.ndarray:
    """Cell samples of ``h_I`` for the level-``level`` interval ``index``."""
    side = 1 << n
    h = np.zeros(side)
    width = side >> level
    start = index * width
    amp = sign * 2.0 ** (level / 2)
    h[start:start + width // 2] = amp
    h[start + width // 2:start + width] = -amp
    return h


def apply_hv_naive(f: GridFunction, v: DirectionField,
                   signs: Optional[SignFn] = None) -> GridFunction:
    """Direct evaluation of the rectangle sum, for cross-checking.

    Every inner product is an explicit integral of ``f`` against a sampled
    ``h_I (x) h_J``.  ``signs(level, index)`` may flip individual Haar
    functions; the result must not depend on it.
    """
    n = _check(f, v)
    side = 1 << n
    vals = f.values
    cell_area = 1.0 / 4 ** n
    out = np.zeros((side, side))
    sgn = signs or (lambda level, index: 1)
    cx = np.arange(side)
    for i in range(n):
        hx = [haar_vector(i, m, n, sgn(i, m)) for m in range(1 << i)]
        for j in range(i, n):
            hy = [haar_vector(j, q, n, sgn(j, q)) for q in range(1 << j)]
            coef = np.empty((1 << j, 1 << i))
            for q in range(1 << j):
                for m in range(1 << i):
                    coef[q, m] = cell_area * np.sum(vals * np.outer(hy[q], hx[m]))
            # at each cell the unique level-(i, j) rectangle through it
            mi = cx >> (n - i)
            qj = cx >> (n - j)
            hxv = np.array([hx[mi[c]][c] for c in range(side)])
            hyv = np.array([hy[qj[c]][c] for c in range(side)])
            term = coef[qj[:, None], mi[None, :]] * np.outer(hyv, hxv)
            out += np.where(j - i >= v.k, term, 0.0)
    return GridFunction(out)


# -- the set of admissible x-intervals ---------------------------------------

@dataclass(frozen=True)
class IntervalSet:
    """Intervals ``I`` through cell ``x`` such that some ``y`` in ``J`` admits ``I x J``."""

    x: int
    J: DyadicInterval
    members: tuple[DyadicInterval, ...]

    def is_upward_closed(self, n: int) -> bool:
        levels = {I.level for I in self.members}
        for I in self.members:
            if not I.contains_cell(self.x, n):
                return False
        # every ancestor of a member that is a Haar interval must be present
        return all(lvl in levels for I in self.members for lvl in range(I.level))

    def levels(self) -> list[int]:
        return sorted(I.level for I in self.members)


def interval_set(x: int, J: DyadicInterval, v: DirectionField) -> IntervalSet:
    """Members found by scanning every ``y`` cell of ``J`` at every level of ``I``."""
    n = v.n
    if not 0 <= J.level < n:
        raise DomainError(f"J must be a Haar interval at level 0..{n - 1}, got {J.level}")
    if not 0 <= x < (1 << n):
        raise DomainError(f"cell index {x} out of range")
    col = v.k[J.cells(n).start:J.cells(n).stop, x]
    members = []
    for i in range(n):
        if np.any(J.level - i >= col):
            members.append(DyadicInterval.containing(x, i, n))
    return IntervalSet(x, J, tuple(members))


# -- averages and maximal functions ------------------------------------------

def martingale_average(g: np.ndarray, level: int, axis: int = -1) -> np.ndarray:
    """Average of ``g`` over the level-``level`` dyadic interval through each cell."""
    g = np.moveaxis(np.asarray(g, dtype=np.float64), axis, -1)
    size = g.shape[-1]
    n = size.bit_length() - 1
    if not 0 <= level <= n:
        raise DomainError(f"level {level} out of range 0..{n}")
    w = 1 << (n - level)
    means = g.reshape(g.shape[:-1] + (1 << level, w)).mean(axis=-1)
    return np.moveaxis(np.repeat(means, w, axis=-1), -1, axis)


def directional_maximal(f: GridFunction, v: DirectionField,
                        abs_inside: bool = False) -> GridFunction:
    """Largest rectangle average through each cell over admissible eccentricities.

    Rectangles use Haar levels ``0..n-1`` on each axis, the same family the
    transform sums over.  ``abs_inside`` averages ``|f|`` instead of taking
    the modulus of the average of ``f``.
    """
    n = _check(f, v)
    src = np.abs(f.values) if abs_inside else f.values
    out = np.zeros_like(src)
    for i in range(n):
        ax = martingale_average(src, i, axis=1)
        for j in range(i, n):
            avg = np.abs(martingale_average(ax, j, axis=0))
            out = np.where(j - i >= v.k, np.maximum(out, avg), out)
    return GridFunction(out)


def square_function_y(f: GridFunction) -> GridFunction:
    """``(sum_J |<f, h_J>_2 h_J(y)|**2)**0.5``, column by column."""
    n = f.n
    c = haar_1d(f.values, axis=0)
    total = np.zeros_like(f.values)
    for j in range(n):
        w = 1 << (n - j)
        block = c[1 << j:2 << j, :]
        total += 2.0 ** j * np.repeat(block ** 2, w, axis=0)
    return GridFunction(np.sqrt(total))


def maximal_m1(f: GridFunction) -> GridFunction:
    """Dyadic maximal function along x: ``max_l |E_l f|`` over levels ``0..n``."""
    out = np.abs(f.values).copy()
    for level in range(f.n):
        out = np.maximum(out, np.abs(martingale_average(f.values, level, axis=1)))
    return GridFunction(out)
