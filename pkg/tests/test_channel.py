import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ldfec.channel import GilbertElliottChannel, IidChannel, apply, burst_lengths, make_rng


def test_zero_loss_never_erases():
    assert not IidChannel(0.0).erasure_mask(1000, make_rng(1)).any()


def test_ge_derived_rates():
    ch = GilbertElliottChannel(0.1, 4)
    assert ch.beta == pytest.approx(0.25)
    assert ch.gamma == pytest.approx(0.0277778, abs=1e-7)


@pytest.mark.parametrize("args", [(1.0, 4), (0.1, 0.5), (0.9, 1.0)])
def test_ge_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        GilbertElliottChannel(*args)


@pytest.mark.parametrize("bad", [-0.1, 1.0])
def test_iid_rejects_bad_epsilon(bad):
    with pytest.raises(ValueError):
        IidChannel(bad)


def test_iid_loss_rate_within_binomial_bounds():
    n, eps = 10**6, 0.1
    frac = IidChannel(eps).erasure_mask(n, make_rng(3)).mean()
    assert abs(frac - eps) <= 4 * np.sqrt(eps * (1 - eps) / n)


def test_ge_long_run_statistics():
    ch = GilbertElliottChannel(0.1, 4)
    mask = ch.erasure_mask(10**7, make_rng(5))
    assert mask.mean() == pytest.approx(0.1, rel=0.02)
    assert burst_lengths(mask).mean() == pytest.approx(4, rel=0.02)


def test_ge_unit_burst_matches_iid_loss_rate():
    n = 10**6
    mask = GilbertElliottChannel(0.1, 1).erasure_mask(n, make_rng(9))
    assert abs(mask.mean() - 0.1) <= 3 * np.sqrt(0.09 / n)


@given(st.integers(0, 2**31), st.sampled_from([IidChannel(0.2), GilbertElliottChannel(0.2, 3)]))
def test_same_seed_same_pattern(seed, ch):
    a = ch.erasure_mask(500, make_rng(seed))
    b = ch.erasure_mask(500, make_rng(seed))
    assert np.array_equal(a, b)


def test_apply_preserves_order():
    out = apply(IidChannel(0.5), range(20), seed=4)
    assert [p for p, _ in out] == list(range(20))
    assert out == apply(IidChannel(0.5), range(20), seed=4)


@given(st.lists(st.booleans(), max_size=60))
def test_burst_lengths_cover_erasures(bits):
    assert burst_lengths(np.array(bits, dtype=bool)).sum() == sum(bits)
