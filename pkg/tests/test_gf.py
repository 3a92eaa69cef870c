import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldfec.gf import PRIMITIVE_POLYS, batch_rank, field, poly_mulmod, rank, solve

BITS = st.sampled_from([1, 2, 4, 8, 12, 16])


@given(BITS, st.data())
def test_field_axioms(m, data):
    F = field(m)
    el = st.integers(0, (1 << m) - 1)
    a, b, c = data.draw(el), data.draw(el), data.draw(el)
    assert F.mul(a, b) == F.mul(b, a)
    assert F.mul(a, F.mul(b, c)) == F.mul(F.mul(a, b), c)
    assert F.mul(a, b ^ c) == F.mul(a, b) ^ F.mul(a, c)
    assert F.mul(a, 1) == a
    if a:
        assert F.mul(a, F.inv(a)) == 1


@given(st.integers(0, 255), st.integers(0, 255))
def test_tables_agree_with_carryless_multiply(a, b):
    assert field(8).mul(a, b) == poly_mulmod(a, b, PRIMITIVE_POLYS[8], 8)


def test_inverse_of_zero_rejected(gf256):
    with pytest.raises(ZeroDivisionError):
        gf256.inv(0)


def test_vector_ops_match_scalar(gf256, rng):
    x = gf256.random(rng, 50)
    y = gf256.random(rng, 50)
    got = gf256.axpy(7, x, y)
    assert list(got) == [gf256.mul(7, int(a)) ^ int(b) for a, b in zip(x, y)]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.sampled_from([2, 8]), st.integers(0, 2**32 - 1))
def test_solve_recovers_random_system(n, m, seed):
    F = field(m)
    rng = np.random.default_rng(seed)
    A = F.random(rng, (n, n))
    X = F.random(rng, (n, 3))
    B = F.matmul(A, X)
    res = solve(F, A, B)
    assert res.rank == rank(F, A)
    if res.full_rank:
        assert np.array_equal(res.solution, X)
    else:
        assert res.free_columns


def test_singular_system_reported(gf256):
    A = np.array([[1, 2], [1, 2]])
    res = solve(gf256, A, np.array([[3], [3]]))
    assert not res.full_rank and res.rank == 1 and not res.inconsistent
    res = solve(gf256, A, np.array([[3], [4]]))
    assert res.inconsistent


def test_batch_rank_matches_rank(rng):
    F = field(2)
    M = F.random(rng, (200, 4, 4)).astype(np.int64)
    assert list(batch_rank(F, M)) == [rank(F, m) for m in M]
