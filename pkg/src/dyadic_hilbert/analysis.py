"""Norms, operator-norm estimates, and brute-force checks of the boundedness argument."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dyadic import DomainError, DyadicInterval
from .field import DirectionField, make_rng
from .haar import GridFunction, diagonal_partial_sums, forward_haar_2d, haar_1d
from .operator import (
    apply_hv,
    apply_hv_adjoint,
    apply_hv_naive,
    haar_vector,
    interval_set,
    martingale_average,
    maximal_m1,
    square_function_y,
)

METHODS = ("exact-svd", "power-iteration", "random-search")


@dataclass(frozen=True)
class NormEstimate:
    p: float
    value: float
    method: str
    iterations: int
    residual: float
    seed: int
    history: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.value < 0 or self.residual < 0:
            raise DomainError("norm estimates and residuals are non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("history")
        return d


def lp_norm(f: GridFunction, p: float) -> float:
    """``(4**-n * sum |f|**p)**(1/p)``; ``p = inf`` gives the max-abs value."""
    if p < 1:
        raise DomainError(f"p must be at least 1, got {p}")
    return _lp(f.values, p)


def _lp(a: np.ndarray, p: float) -> float:
    a = np.abs(a)
    scale = a.max()
    if scale == 0:
        return 0.0
    if math.isinf(p):
        return float(scale)
    # rescale before powering to keep large p finite
    return float(scale * np.mean((a / scale) ** p) ** (1.0 / p))


# -- p = 2 -------------------------------------------------------------------

def dense_matrix(v: DirectionField) -> np.ndarray:
    """The transform as an explicit ``4**n x 4**n`` matrix, built column by column
    from the brute-force evaluator."""
    n = v.n
    size = 4 ** n
    mat = np.empty((size, size))
    for c in range(size):
        e = np.zeros(size)
        e[c] = 1.0
        mat[:, c] = apply_hv_naive(GridFunction(e.reshape(1 << n, 1 << n)), v).values.ravel()
    return mat


def opnorm_exact(v: DirectionField) -> NormEstimate:
    if v.n > 3:
        raise DomainError("the dense singular-value oracle is limited to n <= 3")
    s = np.linalg.svd(dense_matrix(v), compute_uv=False)
    return NormEstimate(2.0, float(s[0]), "exact-svd", 1, 0.0, 0)


def opnorm_l2(v: DirectionField, maxiter: int = 500, tol: float = 1e-8,
              seed: int = 0) -> NormEstimate:
    """Largest singular value by power iteration on ``A^T A``.

    Stops once the Rayleigh quotient changes by at most ``tol`` relative.
    ``history`` holds the square roots of the successive Rayleigh quotients.
    """
    if maxiter < 1 or tol <= 0:
        raise DomainError("maxiter must be >= 1 and tol > 0")
    n = v.n
    x = make_rng(seed).standard_normal((1 << n, 1 << n))
    x /= np.linalg.norm(x)
    lam = 0.0
    residual = 0.0
    history = []
    it = 0
    for it in range(1, maxiter + 1):
        y = apply_hv(GridFunction(x), v)
        z = apply_hv_adjoint(y, v).values
        new = float(np.sum(y.values ** 2))
        if new == 0.0:
            return NormEstimate(2.0, 0.0, "power-iteration", it, 0.0, seed, (0.0,))
        residual = float(np.linalg.norm(z - new * x)) / new
        history.append(math.sqrt(new))
        x = z / np.linalg.norm(z)
        converged = abs(new - lam) <= tol * new
        lam = new
        if converged:
            break
    return NormEstimate(2.0, math.sqrt(lam), "power-iteration", it, residual, seed,
                        tuple(history))


# -- lower bounds by search ----------------------------------------------------

def _atom(n: int, i: int, j: int) -> np.ndarray:
    return np.outer(haar_vector(j, 0, n), haar_vector(i, 0, n))


def opnorm_lp_lower(v: DirectionField, p: float, budget: int = 4, seed: int = 0,
                    max_sweeps: int = 20, max_coords: int = 1024) -> NormEstimate:
    """Best ``||Af||_p / ||f||_p`` found by perturbation ascent; a lower bound.

    Candidates are one Haar atom ``h_I (x) h_J`` per admissible scale pair
    plus ``budget`` Gaussian starts.  The best atom and every Gaussian start
    then go through coordinate ascent: each sweep tries ``+-step`` on up to
    ``max_coords`` cells in random order, and the step halves after a sweep
    with no gain.
    """
    if not 1 < p < math.inf:
        raise DomainError(f"p must lie in (1, inf), got {p}")
    if budget < 0:
        raise DomainError("budget must be non-negative")
    n = v.n
    side = 1 << n
    rng = make_rng(seed)
    columns: dict[int, np.ndarray] = {}

    def column(c: int) -> np.ndarray:
        if c not in columns:
            e = np.zeros(side * side)
            e[c] = 1.0
            columns[c] = apply_hv(GridFunction(e.reshape(side, side)), v).values.ravel()
        return columns[c]

    def ratio(f: np.ndarray, af: np.ndarray) -> float:
        den = _lp(f, p)
        return _lp(af, p) / den if den > 0 else 0.0

    def image(f: np.ndarray) -> np.ndarray:
        return apply_hv(GridFunction(f.reshape(side, side)), v).values.ravel()

    best, best_f = 0.0, None
    for i in range(n):
        for j in range(i, n):
            f = _atom(n, i, j).ravel()
            r = ratio(f, image(f))
            if r > best:
                best, best_f = r, f
    starts = [best_f] if best_f is not None else []
    starts += [rng.standard_normal(side * side) for _ in range(budget)]

    iterations = 0
    for f in starts:
        f = f.copy()
        af = image(f)
        cur = ratio(f, af)
        step = 0.5 * float(np.sqrt(np.mean(f ** 2)))
        floor = 1e-3 * step
        for _ in range(max_sweeps):
            if step < floor:
                break
            iterations += 1
            improved = False
            coords = rng.permutation(side * side)[:max_coords]
            for c in coords:
                col = column(int(c))
                for delta in (step, -step):
                    f[c] += delta
                    trial_af = af + delta * col
                    r = ratio(f, trial_af)
                    if r > cur:
                        cur, af, improved = r, trial_af, True
                        break
                    f[c] -= delta
            if not improved:
                step *= 0.5
        best = max(best, cur)
    return NormEstimate(float(p), best, "random-search", iterations, 0.0, seed)


def partial_sum_stack(f: GridFunction) -> np.ndarray:
    """``D_0 f, ..., D_n f`` stacked along axis 0."""
    return np.stack([d.values for d in diagonal_partial_sums(forward_haar_2d(f))])


def selection_maximal(f: GridFunction) -> tuple[GridFunction, DirectionField]:
    """``max_k |D_k f|`` and the field attaining it (smallest ``k`` on ties)."""
    stack = np.abs(partial_sum_stack(f))
    kstar = np.argmax(stack, axis=0)
    vals = np.take_along_axis(stack, kstar[None], axis=0)[0]
    return GridFunction(vals), DirectionField(kstar)


def adversarial_selection_norm(n: int, budget: int = 4, seed: int = 0,
                               rounds: int = 50, inner: int = 5
                               ) -> tuple[NormEstimate, DirectionField]:
    """Largest ``||max_k |D_k f| ||_2 / ||f||_2`` found, with its greedy field.

    Ascent alternates between the greedy field of the current ``f`` and a
    few power steps for that fixed field; neither half can lower the ratio.
    The field is lacunary but usually fails the Lipschitz condition.
    Starts: the atom ``h (x) h`` on the unit square, then ``budget``
    Gaussian grids.
    """
    if n < 1:
        raise DomainError(f"resolution must be at least 1, got {n}")
    side = 1 << n
    rng = make_rng(seed)
    starts = [_atom(n, 0, 0)] + [rng.standard_normal((side, side)) for _ in range(budget)]
    best_val, best_f, best_v = -1.0, None, None
    iterations = 0
    history = []
    for f in starts:
        f = f / np.linalg.norm(f)
        prev = 0.0
        for _ in range(rounds):
            iterations += 1
            sel, v = selection_maximal(GridFunction(f))
            val = float(np.linalg.norm(sel.values))
            if val <= prev * (1 + 1e-12):
                break
            prev = val
            cur_f, cur_v = f, v
            for _ in range(inner):
                z = apply_hv_adjoint(apply_hv(GridFunction(f), v), v).values
                nz = np.linalg.norm(z)
                if nz == 0:
                    break
                f = z / nz
        history.append(prev)
        if prev > best_val:
            best_val, best_f, best_v = prev, cur_f, cur_v
    fstar = GridFunction(best_f)
    value = apply_hv(fstar, best_v).norm2() / fstar.norm2()
    return (NormEstimate(2.0, value, "random-search", iterations, 0.0, seed, tuple(history)),
            best_v)


# -- brute-force checks of the proof steps -------------------------------------

@dataclass
class YIndependenceResult:
    passed: bool
    checked: int
    violations: int
    witness: Optional[dict] = None


@dataclass
class VerifierReport:
    y_independence: YIndependenceResult
    convexity: bool
    convexity_witness: Optional[dict]
    telescoping: float
    fefferman_stein_step: float
    fefferman_stein_lhs: float
    fefferman_stein_rhs: float
    p: float

    def to_dict(self) -> dict:
        return asdict(self)


def check_y_independence(v: DirectionField) -> YIndependenceResult:
    """For every rectangle ``I x J`` and every cell ``x`` in ``I``: if some ``y``
    in ``J`` admits the rectangle then every ``y`` in ``J`` does."""
    n = v.n
    k = v.k
    side = 1 << n
    checked = 0
    violations = 0
    witness = None
    for j in range(n):
        w = side >> j
        blocks = k.reshape(1 << j, w, side)
        kmin = blocks.min(axis=1)
        kmax = blocks.max(axis=1)
        for i in range(n):
            gap = j - i
            bad = (kmin <= gap) & (gap < kmax)
            checked += bad.size
            count = int(np.count_nonzero(bad))
            violations += count
            if count and witness is None:
                jidx, x = (int(a[0]) for a in np.nonzero(bad))
                col = blocks[jidx, :, x]
                y_ok = jidx * w + int(np.argmax(col <= gap))
                y_bad = jidx * w + int(np.argmax(col > gap))
                witness = {"I": [i, x >> (n - i)], "J": [j, jidx], "x": x,
                           "y_admits": y_ok, "y_rejects": y_bad}
    return YIndependenceResult(violations == 0, checked, violations, witness)


def check_convexity(v: DirectionField) -> tuple[bool, Optional[dict]]:
    """Upward closedness of every interval set, by direct scanning."""
    n = v.n
    for j in range(n):
        for jidx in range(1 << j):
            J = DyadicInterval(j, jidx)
            for x in range(1 << n):
                s = interval_set(x, J, v)
                if not s.is_upward_closed(n):
                    return False, {"x": x, "J": [j, jidx], "levels": s.levels()}
    return True, None


def y_coefficients(f: GridFunction) -> np.ndarray:
    """Packed coefficients ``<f, h_J>_2`` along y; row ``2**j + q`` is ``J = (j, q)``."""
    return haar_1d(f.values, axis=0)


def interval_tops(v: DirectionField) -> np.ndarray:
    """Deepest level of each interval set, ``-1`` when empty.

    Indexed ``[2**j + q, x]`` for ``J = (j, q)``, like the packed y layout.
    """
    n = v.n
    side = 1 << n
    tops = np.full((side, side), -1, dtype=np.int64)
    for j in range(n):
        for q in range(1 << j):
            J = DyadicInterval(j, q)
            for x in range(side):
                levels = interval_set(x, J, v).levels()
                if levels:
                    tops[(1 << j) + q, x] = levels[-1]
    return tops


def martingale_form(f: GridFunction, v: DirectionField,
                    tops: Optional[np.ndarray] = None) -> np.ndarray:
    """The transform rewritten per ``(x, J)`` as ``h_J(y) (E_{L+1} g_J - E_0 g_J)(x)``.

    ``g_J = <f, h_J>_2`` and ``0..L`` are the levels of the interval set of
    ``(x, J)``; an empty set contributes nothing.
    """
    n = v.n
    side = 1 << n
    if tops is None:
        tops = interval_tops(v)
    cy = y_coefficients(f)
    cols = np.arange(side)
    out = np.zeros((side, side))
    for j in range(n):
        for q in range(1 << j):
            slot = (1 << j) + q
            g = cy[slot]
            avgs = np.stack([martingale_average(g, level) for level in range(n + 1)])
            top = tops[slot]
            line = np.where(top >= 0, avgs[np.maximum(top, 0) + 1, cols] - avgs[0], 0.0)
            out += np.outer(haar_vector(j, q, n), line)
    return out


def fefferman_stein_terms(f: GridFunction, p: float) -> tuple[float, float]:
    """``||(sum_J |M_1(g_J h_J)|**2)**0.5||_p`` and ``||(sum_J |g_J h_J|**2)**0.5||_p``."""
    n = f.n
    cy = y_coefficients(f)
    acc = np.zeros_like(f.values)
    for j in range(n):
        for q in range(1 << j):
            piece = np.outer(haar_vector(j, q, n), cy[(1 << j) + q])
            acc += maximal_m1(GridFunction(piece)).values ** 2
    lhs = _lp(np.sqrt(acc), p)
    rhs = lp_norm(square_function_y(f), p)
    return lhs, rhs


def run_verifiers(v: DirectionField, trials: int = 1, seed: int = 0,
                  p: float = 2.0) -> VerifierReport:
    if trials < 1:
        raise DomainError("trials must be at least 1")
    yind = check_y_independence(v)
    convex, convex_witness = check_convexity(v)
    rng = make_rng(seed)
    side = 1 << v.n
    tops = interval_tops(v)
    tele = 0.0
    fs_ratio, fs_lhs, fs_rhs = 0.0, 0.0, 0.0
    for _ in range(trials):
        f = GridFunction(rng.standard_normal((side, side)))
        tele = max(tele, float(np.abs(apply_hv(f, v).values - martingale_form(f, v, tops)).max()))
        lhs, rhs = fefferman_stein_terms(f, p)
        r = lhs / rhs if rhs > 0 else 0.0
        if r >= fs_ratio:
            fs_ratio, fs_lhs, fs_rhs = r, lhs, rhs
    return VerifierReport(yind, convex, convex_witness, tele, fs_ratio, fs_lhs, fs_rhs, p)
