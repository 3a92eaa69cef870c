import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldfec import analysis as A


def test_known_values():
    assert A.busy_time_prob(0, 5, 0.1) == pytest.approx(0.6561, abs=1e-12)
    assert A.busy_time_prob(2, 3, 0.1) == pytest.approx(0.019683, abs=1e-12)
    m = A.busy_time_moments(5, 0.1)
    assert m.E_S == pytest.approx(0.52488)
    assert m.E_S2 == pytest.approx(1.469664)
    assert A.delay_upper_bound(5, 0.1) == pytest.approx(2.48889, abs=1e-5)
    assert A.delay_upper_bound(3, 0.1) == pytest.approx(0.3446712, abs=1e-7)


def test_splus_is_max_not_min():
    pmf = A.busy_time_pmf(5, 0.1)
    s = np.arange(len(pmf.probs))
    assert A.busy_time_moments(5, 0.1).E_Splus == pytest.approx(float(np.sum(pmf.probs * np.maximum(s, 1))))


def test_exact_third_moment_vs_table_form():
    pmf = A.busy_time_pmf(5, 0.1)
    assert A.busy_time_moments(5, 0.1).E_S3 == pytest.approx(pmf.moment(3), rel=1e-8)
    assert A.third_moment_table_form(5, 0.1) == pytest.approx(9.87824, abs=1e-5)


def test_cost_values():
    assert A.decoding_cost(5, 0.1) == pytest.approx(3.13, abs=0.01)
    assert A.decoding_cost(25, 0.02) == pytest.approx(0.67, abs=0.01)


@pytest.mark.parametrize("l,eps", [(5, 0.2), (10, 0.1), (2, 0.6)])
def test_divergent_regimes_rejected(l, eps):
    with pytest.raises(A.DivergenceError):
        A.busy_time_pmf(l, eps)


def test_zero_loss_is_degenerate():
    pmf = A.busy_time_pmf(5, 0.0)
    assert list(pmf.probs) == [1.0] and pmf.tail_bound == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.floats(0.02, 0.95))
def test_pmf_normalizes(l, load):
    pmf = A.busy_time_pmf(l, load / l)
    assert abs(math.fsum(pmf.probs) + pmf.tail_bound - 1) <= 1e-9
    assert np.all(pmf.probs >= 0)


@given(st.integers(1, 30), st.integers(2, 8), st.floats(0.01, 0.9))
def test_tail_bound_dominates(k, l, eps):
    if l * eps >= 1:
        return
    tail = 1 - sum(float(A.busy_time_prob(s, l, eps)) for s in range(k + 1))
    assert A.busy_tail_bound(k, l, eps) >= tail - 1e-12


def test_exact_rational_probabilities():
    p = A.busy_time_prob(3, 4, Fraction(1, 10))
    oracle = A.oracle_busy_pmf(4, Fraction(1, 10), 3).probs(Fraction(1, 10))
    assert float(p) == pytest.approx(float(oracle[3]), rel=1e-14)


@given(st.integers(2, 30), st.integers(2, 10))
def test_binomial_identity(k, l):
    lhs, rhs = A.binomial_identity_sides(k, l)
    assert lhs == rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(2, 5))
def test_cycle_lemma(k, r, l):
    if r > k:
        return
    good, total = A.cycle_lemma_count(k, r, l)
    assert k * good == r * total


def test_worst_case_sum_delay_small():
    # one information erasure at the start of a single interval of l=4
    assert A.worst_case_sum_delay(1, 4) == 3 + 2 + 1


def test_throughput_tail_rejects_threshold_above_rate():
    with pytest.raises(ValueError):
        A.throughput_tail(5, 0.1, 1000, 0.85)


def test_renewal_rate_matches_pmf():
    pmf = A.busy_time_pmf(5, 0.1)
    s = np.arange(len(pmf.probs))
    busy_share = 1 - pmf.probs[0]
    assert A.renewal_rate(5, 0.1) == pytest.approx(busy_share / float(np.sum(pmf.probs * np.maximum(s, 1))))


class TestGroup:
    def test_p0(self):
        assert A.group_busy_prob(0, 10, 2, 0.1) == pytest.approx(0.43046721)

    @pytest.mark.parametrize("l,eps", [(3, 0.1), (5, 0.1), (6, 0.05)])
    def test_single_coded_packet_reduces_to_stream(self, l, eps):
        a = A.group_busy_pmf(l, 1, eps).probs
        b = A.busy_time_pmf(l, eps).probs
        assert np.allclose(a, b, atol=1e-13, rtol=0)

    @pytest.mark.parametrize("lg,c,eps", [(10, 2, 0.1), (12, 3, 0.15), (8, 2, 0.12)])
    def test_methods_agree(self, lg, c, eps):
        a = A.group_busy_pmf(lg, c, eps, method="lattice").probs
        b = A.group_busy_pmf(lg, c, eps, method="recursion").probs
        assert np.allclose(a, b, atol=1e-14, rtol=0)

    def test_delay_c1_equals_stream_bound(self):
        assert A.group_delay_per_packet(5, 1, 0.1) == pytest.approx(A.delay_upper_bound(5, 0.1), rel=1e-9)

    def test_delay_nondecreasing_in_c(self):
        d = [A.group_delay_per_packet(5, c, 0.1) for c in range(1, 6)]
        assert d == sorted(d)

    def test_bad_method(self):
        with pytest.raises(ValueError):
            A.group_busy_pmf(10, 2, 0.1, method="magic")
