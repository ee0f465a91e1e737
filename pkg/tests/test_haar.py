import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_grid
from dyadic_hilbert.dyadic import DomainError, DyadicInterval
from dyadic_hilbert.haar import (
    GridFunction,
    HaarCoefficients,
    diagonal_partial_sums,
    forward_haar_2d,
    inverse_haar_2d,
    non_tensor_component,
    scale_pair_component,
)


def basis_1d(n):
    """Rows: the constant, then h_I in packed order, sampled on cells."""
    side = 2 ** n
    rows = [np.ones(side)]
    for level in range(n):
        for idx in range(2 ** level):
            h = np.zeros(side)
            w = side // 2 ** level
            h[idx * w: idx * w + w // 2] = 2 ** (level / 2)
            h[idx * w + w // 2: (idx + 1) * w] = -(2 ** (level / 2))
            rows.append(h)
    return np.array(rows)


def naive_coefficients(f):
    """Every coefficient as an explicit integral against the sampled basis product:
    ``out[a, b] = 4**-n sum_{y,x} B[a, y] f[y, x] B[b, x]``."""
    n = f.n
    B = basis_1d(n)
    return B @ f.values @ B.T / 4 ** n


def atom(n, I, J):
    B = basis_1d(n)
    return GridFunction(np.outer(B[2 ** J.level + J.index], B[2 ** I.level + I.index]))


def test_constant_has_only_dc():
    c = forward_haar_2d(GridFunction(np.full((8, 8), 2.5)))
    assert c.dc == pytest.approx(2.5)
    rest = c.packed.copy()
    rest[0, 0] = 0
    assert np.abs(rest).max() < 1e-15


def test_atom_has_single_coefficient():
    n = 3
    I, J = DyadicInterval(1, 1), DyadicInterval(2, 3)
    c = forward_haar_2d(atom(n, I, J))
    assert c.coefficient(I, J) == pytest.approx(1.0, abs=1e-12)
    rest = c.packed.copy()
    rest[2 ** J.level + J.index, 2 ** I.level + I.index] = 0
    assert np.abs(rest).max() < 1e-12


def test_forward_matches_naive_inner_products(rng):
    f = random_grid(rng, 5)
    assert np.abs(forward_haar_2d(f).packed - naive_coefficients(f)).max() < 1e-12


def test_block_accessors(rng):
    f = random_grid(rng, 3)
    c = forward_haar_2d(f)
    naive = naive_coefficients(f)
    assert c.xonly(1)[1] == pytest.approx(naive[0, 3])
    assert c.yonly(2)[0] == pytest.approx(naive[4, 0])
    assert c.tensor(0, 2).shape == (4, 1)
    with pytest.raises(DomainError):
        c.tensor(3, 0)


def test_inverse_examples():
    zero = inverse_haar_2d(HaarCoefficients(np.zeros((4, 4))))
    assert np.all(zero.values == 0)
    packed = np.zeros((4, 4))
    packed[0, 0] = 1
    assert np.allclose(inverse_haar_2d(HaarCoefficients(packed)).values, 1.0)


@pytest.mark.parametrize("n", range(9))
def test_round_trip_and_parseval(rng, n):
    f = random_grid(rng, n)
    c = forward_haar_2d(f)
    assert np.abs(inverse_haar_2d(c).values - f.values).max() < 1e-12
    assert abs(c.energy() - f.inner(f)) <= 1e-10 * f.inner(f)
    assert c.packed.size == 4 ** n


def test_inverse_is_also_left_inverse(rng):
    packed = rng.standard_normal((16, 16))
    back = forward_haar_2d(inverse_haar_2d(HaarCoefficients(packed)))
    assert np.abs(back.packed - packed).max() < 1e-12


def test_linearity(rng):
    f, g = random_grid(rng, 4), random_grid(rng, 4)
    lhs = forward_haar_2d(2.0 * f - 0.5 * g).packed
    rhs = 2.0 * forward_haar_2d(f).packed - 0.5 * forward_haar_2d(g).packed
    assert np.abs(lhs - rhs).max() < 1e-12


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (8, 8), elements=st.floats(-1e3, 1e3)))
def test_parseval_property(values):
    f = GridFunction(values)
    energy = f.inner(f)
    assert abs(forward_haar_2d(f).energy() - energy) <= 1e-10 * max(energy, 1e-300) + 1e-300


def test_scale_pair_of_atom():
    n = 3
    I, J = DyadicInterval(1, 0), DyadicInterval(2, 1)
    f = atom(n, I, J)
    c = forward_haar_2d(f)
    for i in range(n):
        for j in range(n):
            comp = scale_pair_component(c, i, j).values
            expected = f.values if (i, j) == (1, 2) else 0.0
            assert np.abs(comp - expected).max() < 1e-12


def test_scale_pairs_complete(rng):
    n = 4
    f = random_grid(rng, n)
    c = forward_haar_2d(f)
    total = non_tensor_component(c).values.copy()
    for i in range(n):
        for j in range(n):
            total += scale_pair_component(c, i, j).values
    assert np.abs(total - f.values).max() < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_scale_pair_matches_naive_sum(rng, n):
    f = random_grid(rng, n)
    coef = naive_coefficients(f)
    B = basis_1d(n)
    c = forward_haar_2d(f)
    for i in range(n):
        for j in range(n):
            naive = np.zeros((2 ** n, 2 ** n))
            for q in range(2 ** j):
                for m in range(2 ** i):
                    a, b = 2 ** j + q, 2 ** i + m
                    naive += coef[a, b] * np.outer(B[a], B[b])
            assert np.abs(scale_pair_component(c, i, j).values - naive).max() < 1e-12


def test_partial_sums(rng):
    n = 4
    f = random_grid(rng, n)
    c = forward_haar_2d(f)
    D = diagonal_partial_sums(c)
    assert len(D) == n + 1
    assert np.all(D[n].values == 0)
    for k in range(n):
        band = sum(scale_pair_component(c, i, i + k).values for i in range(n - k))
        assert np.abs(D[k].values - D[k + 1].values - band).max() < 1e-12


def test_partial_sums_of_square_atom():
    n = 3
    f = atom(n, DyadicInterval(1, 1), DyadicInterval(1, 0))
    D = diagonal_partial_sums(forward_haar_2d(f))
    assert np.abs(D[0].values - f.values).max() < 1e-12
    assert np.abs(D[1].values).max() < 1e-12


def test_partial_sums_are_nested_projections(rng):
    n = 5
    f = random_grid(rng, n)
    D = diagonal_partial_sums(forward_haar_2d(f))
    norms = [d.norm2() for d in D]
    assert all(a >= b - 1e-12 for a, b in zip(norms, norms[1:]))
    for d in D:
        assert abs(d.inner(f - d)) < 1e-10


def test_sign_convention_round_trip(rng):
    f = random_grid(rng, 4)
    c = forward_haar_2d(f, sign=-1)
    assert np.abs(inverse_haar_2d(c, sign=-1).values - f.values).max() < 1e-12
    plus = forward_haar_2d(f)
    assert np.allclose(c.packed[1:, 1:], plus.packed[1:, 1:])
    assert np.allclose(c.packed[0, 1:], -plus.packed[0, 1:])


def test_json_round_trip_exact(rng):
    f = GridFunction(rng.standard_normal((8, 8)) * 1e-7 + 1 / 3)
    text = f.to_json()
    doc = json.loads(text)
    assert doc["n"] == 3 and len(doc["values"]) == 64
    # row-major, y outer
    assert doc["values"][8] == f.values[1, 0]
    assert np.array_equal(GridFunction.from_json(text).values, f.values)


def test_grid_function_rejects_bad_input():
    with pytest.raises(DomainError):
        GridFunction(np.zeros((3, 3)))
    with pytest.raises(DomainError):
        GridFunction(np.array([[np.nan, 0], [0, 0]]))
    with pytest.raises(DomainError):
        GridFunction.from_json('{"n": 2, "values": [1, 2, 3]}')
