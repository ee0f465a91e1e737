"""Direction fields ``v = 2**-k`` on the dyadic grid.

A field is stored as its integer exponents ``k[cy, cx]``.  The admissibility
condition is the dyadic Lipschitz bound with constant 1/2 between the grid
metric and the metric on the values; :func:`validate_field` checks it in
linear time through the equivalent level-set form, and
:func:`validate_pairwise` keeps the quadratic definition for cross-checking.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dyadic import Cell, DomainError, dyadic_distance_2d, value_distance
from .haar import MAX_RESOLUTION, GridFunction, _resolution_of

SEED_LIMIT = 1 << 64
LOG_TOL = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed directly by a 64-bit seed."""
    seed = int(seed)
    if not 0 <= seed < SEED_LIMIT:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.Philox(key=seed))


@dataclass(frozen=True, eq=False)
class DirectionField:
    """Exponents ``k[cy, cx]`` in ``0..n``; the direction value is ``2**-k``."""

    k: np.ndarray

    def __post_init__(self):
        k = np.array(self.k)
        if k.ndim != 2 or k.shape[0] != k.shape[1]:
            raise DomainError(f"expected a square 2D grid, got shape {k.shape}")
        n = _resolution_of(k.shape[0])
        if n > MAX_RESOLUTION:
            raise DomainError(f"resolution {n} exceeds {MAX_RESOLUTION}")
        if k.size and not np.issubdtype(k.dtype, np.integer):
            if not np.all(k == np.round(k)):
                raise DomainError("exponents must be integers")
        k = k.astype(np.int64)
        if k.min() < 0 or k.max() > n:
            raise DomainError(f"exponents must lie in 0..{n}")
        k.setflags(write=False)
        object.__setattr__(self, "k", k)

    @property
    def n(self) -> int:
        return self.k.shape[0].bit_length() - 1

    @classmethod
    def constant(cls, n: int, k: int) -> DirectionField:
        return cls(np.full((1 << n, 1 << n), k, dtype=np.int64))

    @classmethod
    def clamped(cls, k: np.ndarray) -> DirectionField:
        """Build from arbitrary non-negative exponents, clamping above ``n``."""
        k = np.asarray(k)
        n = _resolution_of(k.shape[0])
        if k.min() < 0:
            raise DomainError("exponents must be non-negative")
        return cls(np.minimum(k, n))

    def values(self) -> np.ndarray:
        return np.ldexp(1.0, -self.k)

    def __eq__(self, other):
        if not isinstance(other, DirectionField):
            return NotImplemented
        return np.array_equal(self.k, other.k)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "k": self.k.ravel().tolist()})

    @classmethod
    def from_json(cls, text: str) -> DirectionField:
        doc = json.loads(text)
        try:
            n = int(doc["n"])
            flat = np.asarray(doc["k"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed direction field document: {exc}") from exc
        if flat.shape != (4 ** n,):
            raise DomainError(f"expected {4 ** n} exponents for n={n}, got {flat.size}")
        return cls(flat.reshape(1 << n, 1 << n))


@dataclass(frozen=True)
class Verdict:
    valid: bool
    witness: Optional[tuple[Cell, Cell]] = None

    def __bool__(self):
        return self.valid


def _as_exponents(v) -> np.ndarray:
    k = v.k if isinstance(v, DirectionField) else np.asarray(v, dtype=np.int64)
    if k.min() < 0:
        raise DomainError("exponents must be non-negative")
    return k


def _violates(k: np.ndarray, n: int, p: tuple[int, int], q: tuple[int, int]) -> bool:
    ka, kb = int(k[p[1], p[0]]), int(k[q[1], q[0]])
    d = dyadic_distance_2d(Cell(n, *p), Cell(n, *q))
    return value_distance(ka, kb) > d / 2


def validate_pairwise(v) -> Verdict:
    """Quadratic check of the Lipschitz bound over all ordered cell pairs.

    Pairs are scanned in lexicographic order of ``(cx1, cy1, cx2, cy2)``;
    accepts raw exponent arrays with entries above ``n``.
    """
    k = _as_exponents(v)
    n = _resolution_of(k.shape[0])
    side = 1 << n
    cells = [(cx, cy) for cx in range(side) for cy in range(side)]
    for p in cells:
        for q in cells:
            if p != q and k[p[1], p[0]] != k[q[1], q[0]] and _violates(k, n, p, q):
                return Verdict(False, (Cell(n, *p), Cell(n, *q)))
    return Verdict(True)


def _block_view(a: np.ndarray, m: int, n: int) -> np.ndarray:
    """View of ``a`` as ``[by, bx, y, x]`` blocks of side ``2**(n - m)``."""
    w = 1 << (n - m)
    return a.reshape(1 << m, w, 1 << m, w).transpose(0, 2, 1, 3)


def _violating_cells(k: np.ndarray, n: int) -> np.ndarray:
    """Cells taking part in at least one violating pair.

    A level-``m`` square that holds the exponent ``m`` must be constant;
    otherwise every cell in it violates against a cell carrying ``m``.
    """
    bad = np.zeros(k.shape, dtype=bool)
    for m in range(n):
        blocks = _block_view(k, m, n)
        has_m = (blocks == m).any(axis=(2, 3))
        const = blocks.min(axis=(2, 3)) == blocks.max(axis=(2, 3))
        flag = has_m & ~const
        w = 1 << (n - m)
        bad |= np.repeat(np.repeat(flag, w, axis=0), w, axis=1)
    return bad


def validate_field(v) -> Verdict:
    """Check the dyadic Lipschitz-1/2 bound via the level-set criterion.

    Valid iff around every cell the dyadic square of side ``2**-k(cell)``
    carries a constant exponent.  The witness is the lexicographically first
    violating pair, the same one :func:`validate_pairwise` reports.
    """
    k = _as_exponents(v)
    n = _resolution_of(k.shape[0])
    bad = _violating_cells(k, n)
    if not bad.any():
        return Verdict(True)
    # (cx, cy) ordering: smallest cx first, then smallest cy
    cys, cxs = np.nonzero(bad)
    first = np.lexsort((cys, cxs))[0]
    px, py = int(cxs[first]), int(cys[first])
    side = 1 << n
    bitlen = np.array([i.bit_length() for i in range(side)])
    idx = np.arange(side)
    lx = n - bitlen[idx ^ px]
    ly = n - bitlen[idx ^ py]
    common = np.minimum(lx[None, :], ly[:, None])
    kp = k[py, px]
    viol = (k != kp) & (np.minimum(k, kp) <= common)
    qys, qxs = np.nonzero(viol)
    if qxs.size:
        j = np.lexsort((qys, qxs))[0]
        return Verdict(False, (Cell(n, px, py), Cell(n, int(qxs[j]), int(qys[j]))))
    raise AssertionError("violating cell without a partner")  # pragma: no cover


def generate_field(seed: int, n: int, mode: str = "random", *, k: int = 0,
                   pmax: float = 0.5, depth: Optional[int] = None) -> DirectionField:
    """Random or constant admissible field.

    ``mode="constant"`` returns ``k`` everywhere.  ``mode="random"`` splits
    the unit square recursively: a square of side ``2**-m`` is subdivided
    with probability ``pmax`` while ``m < min(n, depth)``, otherwise it gets
    one exponent drawn uniformly from ``m..n``.  Children are visited in the
    order (x, y) = (0, 0), (1, 0), (0, 1), (1, 1).
    """
    if not 0 <= n <= MAX_RESOLUTION:
        raise DomainError(f"resolution must lie in 0..{MAX_RESOLUTION}, got {n}")
    if mode == "constant":
        if not 0 <= k <= n:
            raise DomainError(f"constant exponent must lie in 0..{n}, got {k}")
        return DirectionField.constant(n, k)
    if mode != "random":
        raise DomainError(f"unknown field mode {mode!r}")
    if not 0.0 <= pmax <= 1.0:
        raise DomainError(f"subdivision probability must lie in [0, 1], got {pmax}")
    cap = n if depth is None else depth
    if cap < 0:
        raise DomainError(f"depth cap must be non-negative, got {depth}")
    cap = min(cap, n)
    rng = make_rng(seed)
    out = np.empty((1 << n, 1 << n), dtype=np.int64)

    def fill(m: int, qx: int, qy: int) -> None:
        if m < cap and rng.random() < pmax:
            for dy in (0, 1):
                for dx in (0, 1):
                    fill(m + 1, 2 * qx + dx, 2 * qy + dy)
            return
        w = 1 << (n - m)
        out[qy * w:(qy + 1) * w, qx * w:(qx + 1) * w] = rng.integers(m, n + 1)

    fill(0, 0, 0)
    return DirectionField(out)


def strict_floor(x: float) -> int:
    """Largest integer strictly below ``x``.

    Values within ``LOG_TOL`` of an integer are treated as that integer.
    """
    r = round(x)
    if abs(x - r) <= LOG_TOL:
        return int(r) - 1
    return math.floor(x)


def round_from_samples(u: GridFunction) -> tuple[DirectionField, int]:
    """Exponent field with ``log2 v = [log2 u]``, plus the number of clamped cells.

    The bracket is the strict lower integer part, so a sample equal to a
    power of two moves down a full step.  The result is not guaranteed to be
    admissible.
    """
    vals = u.values
    if np.any(vals <= 0) or np.any(vals > 1):
        raise DomainError("samples must lie in (0, 1]")
    n = u.n
    logs = np.log2(vals)
    k = np.vectorize(lambda x: -strict_floor(x), otypes=[np.int64])(logs)
    clamped = int(np.count_nonzero(k > n))
    return DirectionField(np.clip(k, 0, n)), clamped


def level_set(v: DirectionField, k: int) -> np.ndarray:
    """Mask of the cells where the field equals ``2**-k``."""
    if not 0 <= k <= v.n:
        raise DomainError(f"exponent {k} out of range 0..{v.n}")
    return v.k == k


def coarsen(v: DirectionField, m: int, qx: int, qy: int) -> DirectionField:
    """Overwrite the level-``m`` square ``(qx, qy)`` with the constant ``m``.

    Only a coarsening when every exponent in the square is already ``>= m``;
    anything else is refused, since it can break admissibility of the cells
    around the square.
    """
    n = v.n
    if not 0 <= m <= n:
        raise DomainError(f"level {m} out of range 0..{n}")
    k = v.k.copy()
    w = 1 << (n - m)
    if k[qy * w:(qy + 1) * w, qx * w:(qx + 1) * w].min() < m:
        raise DomainError("square holds exponents below its level; not a coarsening")
    k[qy * w:(qy + 1) * w, qx * w:(qx + 1) * w] = m
    return DirectionField(k)
