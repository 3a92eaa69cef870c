import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldfec import analysis as A


@pytest.mark.parametrize("Q", [2, 4, 256])
@pytest.mark.parametrize("k", [1, 2])
def test_rank_bounds_coincide_small(k, Q):
    lo, up = A.rank_bounds(k, Q)
    assert lo == pytest.approx(up, abs=1e-15)


@given(st.integers(1, 30), st.sampled_from([2, 4, 16, 256]))
def test_rank_bounds_ordered(k, Q):
    lo, up = A.rank_bounds(k, Q)
    assert 0 < lo <= up + 1e-15 <= 1 + 1e-15


@given(st.integers(1, 8), st.integers(0, 2**31))
def test_pattern_formula_within_bounds(k, seed):
    rng = np.random.default_rng(seed)
    E = A.sample_admissible_pattern(k, rng)
    assert sum(E) == k
    Z = A.zero_counts(E)
    for Q in (2, 4, 256):
        lo, up = A.rank_bounds(k, Q)
        p = A.full_rank_probability(Z, Q)
        assert lo - 1e-12 <= p <= up + 1e-12


def test_monte_carlo_matches_formula():
    rng = np.random.default_rng(1)
    Z = [0, 0, 1, 2]
    f = A.monte_carlo_full_rank(Z, 1, 50_000, rng)
    p = A.full_rank_probability(Z, 2)
    assert abs(f - p) < 4 * np.sqrt(p * (1 - p) / 50_000)


def test_epsilon0_root():
    e0 = A.solve_epsilon0(5, 0.1, 2)
    assert e0 == pytest.approx(0.0641519663, abs=1e-9)
    assert 0 < e0 < 0.1


@pytest.mark.parametrize("l,eps,Q", [(5, 0.05, 4), (7, 0.1, 256), (3, 0.2, 2)])
def test_series_equals_closed_form(l, eps, Q):
    closed, _ = A.corollary_failure_bound(l, eps, Q)
    assert A.stream_failure_bound(l, eps, Q) == pytest.approx(closed, abs=1e-12)


def test_bound_decreases_with_field_size():
    vals = [A.stream_failure_bound(5, 0.1, Q) for Q in (2, 4, 16, 256)]
    assert vals == sorted(vals, reverse=True)


def test_numeric_failure_inside_brackets():
    r = A.exact_failure_numeric(5, 0.1, 4, 4)
    assert r.lower <= r.estimate <= r.upper
    assert r.estimate <= A.stream_failure_bound(5, 0.1, 4)


def test_numeric_failure_refuses_huge_enumeration():
    with pytest.raises(ValueError):
        A.exact_failure_numeric(10, 0.05, 4, 5)


def test_report_serializes():
    d = A.failure_report(5, 0.1, 256, k_max=3).to_dict()
    assert set(d["rank_bounds"]) == {1, 2, 3}
