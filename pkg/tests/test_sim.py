import json

import numpy as np
import pytest

from ldfec import analysis as A
from ldfec.channel import GilbertElliottChannel, IidChannel
from ldfec.codec import CodeParams
from ldfec.sim import Scenario, SimReport, measure_gt, run, run_single, sweep, with_axis, workers


def _sc(**kw):
    base = dict(code=CodeParams.stream(5), channel=IidChannel(0.1), N=50_000, ideal_recovery=True, seeds=[1])
    base.update(kw)
    return Scenario(**base)


def test_padding_to_whole_intervals():
    sc = _sc(N=12)
    assert sc.N == 15 and sc.padded_from == 12


def test_engine_resolution():
    assert _sc().resolved_engine == "vector"
    assert _sc(ideal_recovery=False).resolved_engine == "codec"
    assert _sc(code=CodeParams.block(20, 16)).resolved_engine == "codec"


def test_closed_loop_needs_delay():
    with pytest.raises(ValueError):
        _sc(mode="closed-loop", feedback_delay=0)


def test_reproducible():
    a = run(_sc(replications=2)).to_json()
    b = run(_sc(replications=2)).to_json()
    assert a == b


def test_parallel_equals_serial():
    sc = _sc(replications=3, N=20_000)
    assert run(sc, n_workers=1).to_json() == run(sc, n_workers=3).to_json()


def test_workers_env(monkeypatch):
    monkeypatch.setenv("LDFEC_WORKERS", "3")
    assert workers() == 3
    monkeypatch.setenv("LDFEC_WORKERS", "junk")
    assert workers() == 1


def test_merge_is_associative():
    parts = [run_single(_sc(N=10_000), 1, r) for r in range(3)]
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    assert left.summary() == right.summary()


def test_zero_loss():
    rep = run(_sc(channel=IidChannel(0.0)))
    assert rep.gt == pytest.approx(0.8) and rep.mean_delay == 0 and rep.busy_periods == 0


def test_vector_and_codec_agree_in_distribution():
    v = run(_sc(N=200_000, seeds=[2]))
    c = run(_sc(N=200_000, seeds=[3], engine="codec"))
    assert c.delay_per_slot == pytest.approx(v.delay_per_slot, rel=0.15)
    assert c.per == 0.0


def test_codec_payloads_verified():
    rep = run(_sc(N=5_000, engine="codec", ideal_recovery=False, payload_symbols=4))
    assert "payload-mismatch" not in rep.flags
    assert rep.delivered == rep.n_info


def test_busy_pmf_close_to_analysis():
    rep = run(_sc(N=500_000))
    pmf = A.busy_time_pmf(5, 0.1).probs
    h = rep.busy_pmf()
    n = max(len(h), len(pmf))
    tv = 0.5 * np.abs(np.pad(h, (0, n - len(h))) - np.pad(pmf, (0, n - len(pmf)))).sum()
    assert tv < 0.02


def test_block_open_loop_loses_packets_closed_loop_does_not():
    base = dict(code=CodeParams.block(20, 16), ideal_recovery=False, N=20_000, seeds=[4])
    opened = run(_sc(**base))
    closed = run(_sc(**base, mode="closed-loop", feedback_delay=10))
    assert opened.per > 0
    assert closed.per == 0 and closed.retransmissions > 0


def test_stream_closed_loop_delivers_everything():
    rep = run(_sc(ideal_recovery=False, mode="closed-loop", feedback_delay=8, N=10_000))
    assert rep.per == 0.0


def test_gilbert_elliott_runs():
    rep = run(_sc(channel=GilbertElliottChannel(0.05, 3), N=20_000))
    assert 0 < rep.busy_periods


def test_divergent_flag():
    rep = run(_sc(code=CodeParams.stream(10), N=10_000))
    assert "divergent" in rep.flags


def test_codec_op_counts_are_cubic_at_most():
    rep = run(_sc(N=20_000, engine="codec", ideal_recovery=False))
    for dim, ops in rep.busy_ops:
        assert ops <= 2 * dim**3 / 3 + 4 * dim**2


def test_report_roundtrip():
    rep = run(_sc(N=5_000))
    d = json.loads(rep.to_json())
    assert SimReport.from_dict(d).to_json() == rep.to_json()
    again = Scenario.from_dict(d["scenario"])
    assert again.to_dict() == d["scenario"]


def test_sweep_axes():
    t = _sc(N=10_000)
    assert with_axis(t, "rate", 0.75).code.l == 4
    assert with_axis(t, "c", 3).code.lg == 15
    assert with_axis(t, "epsilon", 0.05).channel.epsilon == 0.05
    b = with_axis(_sc(code=CodeParams.block(20, 16)), "block_size", 8)
    assert (b.code.n, b.code.k) == (10, 8)
    with pytest.raises(ValueError):
        with_axis(t, "rate", 0.7)
    pts = sweep(t, "epsilon", [0.02, 0.1])
    assert pts[0][1].mean_delay < pts[1][1].mean_delay


def test_measure_gt():
    gt = measure_gt(_sc(N=5_000, replications=300))
    assert gt.shape == (300,)
    assert np.all(gt <= 0.8 + 1e-12) and gt.mean() > 0.79
