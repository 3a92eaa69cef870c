import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldfec.codec import (
    BlockEncoder,
    CodeParams,
    Decoder,
    decoder_for,
    encode_block,
    encode_group,
    encode_stream,
    per_packet_delay,
)
from ldfec.gf import field


def _decode(params, packets, erased, F, ideal=False):
    dec = decoder_for(params, F, ideal=ideal)
    out = []
    for p in packets:
        out += dec.ingest(p.slot, p, p.slot in erased)
    return dec, out


@pytest.mark.parametrize("kwargs", [dict(variant="stream", l=1), dict(variant="group", lg=4, c=4),
                                    dict(variant="block", n=4, k=5)])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        CodeParams(**kwargs)


def test_rates():
    assert CodeParams.stream(5).rate == pytest.approx(0.8)
    assert CodeParams.group(10, 2).rate == pytest.approx(0.8)
    assert CodeParams.block(20, 16).rate == pytest.approx(0.8)


def test_stream_layout(gf256):
    info = np.arange(1, 7)
    pk = encode_stream(info, CodeParams.stream(4), gf256, seed=1)
    assert [repr(p) for p in pk] == ["<u1@1>", "<u2@2>", "<u3@3>", "<c1[1,3]@4>",
                                     "<u4@5>", "<u5@6>", "<u6@7>", "<c2[1,6]@8>"]


def test_feedback_shrinks_window(gf256):
    pk = encode_stream(np.arange(1, 7), CodeParams.stream(4), gf256, seed=1, window_policy={8: 2})
    assert repr(pk[-1]) == "<c2[3,6]@8>"


def test_single_coded_group_equals_stream(gf256):
    info = np.arange(1, 13)
    a = encode_stream(info, CodeParams.stream(4), gf256, seed=3)
    b = encode_group(info, CodeParams.group(4, 1), gf256, seed=3)
    assert [repr(x) for x in a] == [repr(x) for x in b]
    assert all(np.array_equal(x.coeffs, y.coeffs) for x, y in zip(a, b))


def test_worked_delay_example(gf256):
    params = CodeParams.stream(4)
    info = gf256.random(np.random.default_rng(0), (6, 3))
    pk = encode_stream(info, params, gf256, seed=1)
    dec, out = _decode(params, pk, {2, 4}, gf256)
    delays, missing = per_packet_delay(out, 6)
    assert list(delays) == [0, 6, 5, 3, 2, 1] and not missing
    bp = dec.busy[0]
    assert (bp.t_tilde, bp.t, bp.T, bp.S) == (2, 0, 8, 2)
    assert np.array_equal(dec.known[2], info[1])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**31), st.floats(0.0, 0.15))
def test_stream_roundtrip_recovers_payload(l, seed, eps):
    F = field(8)
    params = CodeParams.stream(l)
    rng = np.random.default_rng(seed)
    info = F.random(rng, (6 * (l - 1), 4))
    pk = encode_stream(info, params, F, seed=seed, tail=20)
    erased = {p.slot for p in pk[: 6 * l] if rng.random() < eps}
    dec, out = _decode(params, pk, erased, F)
    # deliveries are in order and carry correct payloads
    assert [d.index for d in out] == list(range(1, len(out) + 1))
    for d in out:
        assert np.array_equal(dec.known[d.index], info[d.index - 1])
    assert len(out) == len(info)


def test_ideal_mode_matches_field_mode_without_dependence(gf256):
    params = CodeParams.stream(5)
    info = gf256.random(np.random.default_rng(1), (40, 1))
    pk = encode_stream(info, params, gf256, seed=2)
    erased = {2, 3, 9, 21, 22, 23}
    _, a = _decode(params, pk, erased, gf256)
    _, b = _decode(params, pk, erased, None, ideal=True)
    assert [(d.index, d.slot) for d in a] == [(d.index, d.slot) for d in b]


def test_block_code_recovers_within_block(gf256):
    params = CodeParams.block(6, 4)
    info = gf256.random(np.random.default_rng(5), (10, 2))
    pk = encode_block(info, params, gf256, seed=4)
    assert sum(not p.is_info for p in pk) == 3 * 2
    dec, out = _decode(params, pk, {1, 3}, gf256)
    assert [d.index for d in out] == list(range(1, 11))
    assert all(np.array_equal(dec.known[j], info[j - 1]) for j in range(1, 11))


def test_block_retransmit_stays_in_block(gf256):
    enc = BlockEncoder(CodeParams.block(6, 4), np.arange(1, 9), gf256, np.random.default_rng(0))
    p = enc.retransmit(1)
    assert (p.lo, p.hi) == enc.block_range(1)


def test_decoder_rejects_out_of_order_slots(gf256):
    pk = encode_stream(np.arange(1, 4), CodeParams.stream(4), gf256, seed=0)
    dec = Decoder(gf256, 4)
    dec.ingest(2, pk[1])
    with pytest.raises(ValueError):
        dec.ingest(1, pk[0])


def test_field_mode_counts_dependence_in_gf2():
    F = field(1)
    params = CodeParams.stream(3)
    rng = np.random.default_rng(8)
    info = F.random(rng, (400, 1))
    pk = encode_stream(info, params, F, seed=8, tail=50)
    erased = {p.slot for p in pk[:600] if rng.random() < 0.2}
    dec, _ = _decode(params, pk, erased, F)
    assert dec.dependence_events > 0
