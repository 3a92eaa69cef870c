from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldfec import analysis as A


def test_small_case_and_printed_convention():
    assert A.kreweras_enumerate((1, 2), 2) == 5
    assert A.kreweras_count((1, 2), 2) == 5
    assert A.kreweras_recursion((1, 2), 2) == 5
    assert A.kreweras_step((1, 2), 2, [1, 2], plus_one=False) == 4
    assert A.kreweras_recursion((1, 2), 2, plus_one=False) == 2


@pytest.mark.parametrize("n", range(1, 5))
def test_determinant_matches_enumeration(n):
    for a in combinations(range(7), n):
        assert A.kreweras_count(a, n) == A.kreweras_enumerate(a, n)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_nondecreasing_sequences(xs):
    a = sorted(xs)
    n = len(a)
    assert A.kreweras_count(a, n) == A.kreweras_enumerate(a, n) == A.kreweras_recursion(a, n)


def test_rejects_decreasing_sequence():
    with pytest.raises(ValueError):
        A.kreweras_count((3, 1), 2)


def test_group_np_counts():
    assert A.group_np_count(4, 2, 2, 0) == 17
    for lg in range(2, 6):
        for c in range(1, lg):
            for s in range(2, 4):
                for p in range(c):
                    if s * lg <= 16:
                        assert A.group_np_count(lg, c, s, p) == A.oracle_np_count(lg, c, s, p)
                        assert A.group_np_count_det(lg, c, s, p) == A.group_np_count(lg, c, s, p)


def test_dominating_sequence_nondecreasing():
    seq = A.group_dominating_sequence(6, 2, 3, 1)
    assert list(seq) == sorted(seq)
