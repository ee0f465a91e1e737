"""Dyadic intervals, rectangles and cells, and the dyadic metrics.

Intervals are half-open on the left, ``(index * 2**-level, (index + 1) * 2**-level]``.
Lengths and distances are returned as exact :class:`fractions.Fraction`
powers of two.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def _check_resolution(n: int) -> None:
    if not isinstance(n, (int,)) or n < 0:
        raise DomainError(f"resolution exponent must be a non-negative integer, got {n!r}")


def _check_index(a: int, n: int) -> None:
    if not 0 <= a < (1 << n):
        raise DomainError(f"cell index {a} out of range for resolution {n}")


@dataclass(frozen=True, order=True)
class DyadicInterval:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise DomainError(f"negative level {self.level}")
        if not 0 <= self.index < (1 << self.level):
            raise DomainError(f"index {self.index} out of range at level {self.level}")

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def left(self) -> Fraction:
        return self.index * self.length

    @property
    def right(self) -> Fraction:
        return (self.index + 1) * self.length

    def parent(self) -> DyadicInterval:
        if self.level == 0:
            raise DomainError("the unit interval has no parent")
        return DyadicInterval(self.level - 1, self.index >> 1)

    def children(self) -> tuple[DyadicInterval, DyadicInterval]:
        return (DyadicInterval(self.level + 1, 2 * self.index),
                DyadicInterval(self.level + 1, 2 * self.index + 1))

    def contains(self, other: DyadicInterval) -> bool:
        """True if ``other`` is a (non-strict) dyadic subinterval."""
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def contains_cell(self, c: int, n: int) -> bool:
        if self.level > n:
            return False
        return c >> (n - self.level) == self.index

    def cells(self, n: int) -> range:
        """Level-``n`` cell indices covered by this interval."""
        if self.level > n:
            raise DomainError(f"interval at level {self.level} is finer than resolution {n}")
        width = 1 << (n - self.level)
        return range(self.index * width, (self.index + 1) * width)

    @classmethod
    def containing(cls, c: int, level: int, n: int) -> DyadicInterval:
        """The level-``level`` interval containing cell ``c`` at resolution ``n``."""
        _check_index(c, n)
        if not 0 <= level <= n:
            raise DomainError(f"level {level} out of range for resolution {n}")
        return cls(level, c >> (n - level))


@dataclass(frozen=True)
class DyadicRectangle:
    """``I x J`` with ``ix = I`` along x and ``jy = J`` along y."""

    ix: DyadicInterval
    jy: DyadicInterval

    @property
    def eccentricity(self) -> Fraction:
        """``|J| / |I|``."""
        return self.jy.length / self.ix.length

    def contains_cell(self, cell: Cell) -> bool:
        return self.ix.contains_cell(cell.cx, cell.n) and self.jy.contains_cell(cell.cy, cell.n)


@dataclass(frozen=True, order=True)
class Cell:
    n: int
    cx: int
    cy: int

    def __post_init__(self):
        _check_resolution(self.n)
        _check_index(self.cx, self.n)
        _check_index(self.cy, self.n)

    def as_rectangle(self) -> DyadicRectangle:
        return DyadicRectangle(DyadicInterval(self.n, self.cx), DyadicInterval(self.n, self.cy))


def common_level(a: int, b: int, n: int) -> int:
    """Deepest level at which cells ``a`` and ``b`` share a dyadic interval."""
    _check_index(a, n)
    _check_index(b, n)
    return n - (a ^ b).bit_length()


def dyadic_distance_1d(a: int, b: int, n: int) -> Fraction:
    """Length of the smallest dyadic interval containing cells ``a`` and ``b``.

    Equal cells are at distance ``2**-n``.
    """
    _check_resolution(n)
    return Fraction(1, 1 << common_level(a, b, n))


def dyadic_distance_2d(p: Cell, q: Cell) -> Fraction:
    """Side of the smallest dyadic square containing both cells."""
    if p.n != q.n:
        raise DomainError(f"cells at different resolutions ({p.n} and {q.n})")
    return max(dyadic_distance_1d(p.cx, q.cx, p.n), dyadic_distance_1d(p.cy, q.cy, p.n))


def value_distance(ka: int, kb: int) -> Fraction:
    """Dyadic distance between the values ``2**-ka`` and ``2**-kb`` in (0, 1].

    For distinct values the smallest dyadic interval holding both is
    ``(0, 2**-min(ka, kb)]``.
    """
    if ka < 0 or kb < 0:
        raise DomainError(f"exponents must be non-negative, got {ka}, {kb}")
    if ka == kb:
        return Fraction(0)
    return Fraction(1, 1 << min(ka, kb))
