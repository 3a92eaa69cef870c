"""Slotted Monte Carlo simulation of the codes over erasure channels.

Two engines produce the same report type:

* ``vector``: numpy implementation of the idealised decoder (each received
  coded packet repairs one pending erasure) for open-loop stream and group
  codes.  Fast enough for millions of busy periods.
* ``codec``: drives the real encoder and decoder slot by slot over a
  finite field; needed for block codes, feedback and operation counts.

Replications are seeded with ``SeedSequence([seed, rep])`` and can run in
worker processes (``LDFEC_WORKERS``).
"""

from __future__ import annotations

import json
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .channel import GilbertElliottChannel, IidChannel, make_rng
from .codec import BlockEncoder, CodeParams, Decoder, SlidingEncoder
from .gf import field as gf_field

MODES = ("open-loop", "closed-loop")
ENGINES = ("auto", "vector", "codec")
WORKERS_ENV = "LDFEC_WORKERS"


@dataclass
class Scenario:
    code: CodeParams
    channel: IidChannel | GilbertElliottChannel
    N: int
    mode: str = "open-loop"
    feedback_delay: int = 0
    field_bits: int = 8
    ideal_recovery: bool = False
    seeds: list[int] = field(default_factory=lambda: [0])
    replications: int = 1
    engine: str = "auto"
    payload_symbols: int = 1
    tail_packets: int = 0
    padded_from: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.mode == "closed-loop" and self.feedback_delay < 1:
            raise ValueError("closed-loop runs need feedback_delay >= 1")
        if self.N < 1 or self.replications < 1:
            raise ValueError("N and replications must be positive")
        period = self.code.period
        if self.N % period:
            self.padded_from = self.padded_from or self.N
            self.N += period - self.N % period

    @property
    def resolved_engine(self) -> str:
        if self.engine != "auto":
            return self.engine
        vector_ok = self.ideal_recovery and self.mode == "open-loop" and self.code.variant != "block"
        return "vector" if vector_ok else "codec"

    @property
    def divergent(self) -> bool:
        eps = self.channel.loss_rate
        return self.code.period * eps >= self.code.coded_per_period

    def runs(self) -> list[tuple[int, int]]:
        return [(s, r) for s in self.seeds for r in range(self.replications)]

    def to_dict(self) -> dict:
        d = {
            "code": self.code.to_dict(),
            "channel": self.channel.to_dict(),
            "N": self.N,
            "mode": self.mode,
            "feedback_delay": self.feedback_delay,
            "field_bits": self.field_bits,
            "ideal_recovery": self.ideal_recovery,
            "seeds": list(self.seeds),
            "replications": self.replications,
            "engine": self.engine,
            "payload_symbols": self.payload_symbols,
            "tail_packets": self.tail_packets,
        }
        if self.padded_from is not None:
            d["padded_from"] = self.padded_from
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        d = dict(d)
        code = d.pop("code")
        code = CodeParams(**code) if isinstance(code, dict) else code
        ch = d.pop("channel")
        if isinstance(ch, dict):
            ch = dict(ch)
            model = ch.pop("model", "iid")
            ch = IidChannel(**ch) if model == "iid" else GilbertElliottChannel(**ch)
        return cls(code=code, channel=ch, **d)


def _pad_add(a: list[int], b: list[int]) -> list[int]:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]


@dataclass
class SimReport:
    """Aggregated measurements; merging two reports adds their counters."""

    scenario: dict
    n_slots: int = 0
    n_info: int = 0
    delivered: int = 0
    delay_sum: int = 0
    delay_sq_sum: int = 0
    delay_hist: list[int] = field(default_factory=list)
    busy_hist: list[int] = field(default_factory=list)
    open_intervals: int = 0
    censored: int = 0
    dependence_events: int = 0
    ops: int = 0
    subtract_ops: int = 0
    busy_ops: list[list[int]] = field(default_factory=list)
    retransmissions: int = 0
    flags: list[str] = field(default_factory=list)
    per_seed: list[dict] = field(default_factory=list)

    # -- derived metrics ----------------------------------------------------

    @property
    def mean_delay(self) -> float:
        """Mean in-order delay per delivered information packet (slots)."""
        return self.delay_sum / self.delivered if self.delivered else 0.0

    @property
    def delay_per_slot(self) -> float:
        """Total in-order delay divided by transmitted slots."""
        return self.delay_sum / self.n_slots if self.n_slots else 0.0

    @property
    def gt(self) -> float:
        return self.delivered / self.n_slots if self.n_slots else 0.0

    @property
    def per(self) -> float:
        return (self.n_info - self.delivered) / self.n_info if self.n_info else 0.0

    @property
    def ops_per_info(self) -> float:
        return self.ops / self.n_info if self.n_info else 0.0

    @property
    def busy_periods(self) -> int:
        return int(sum(self.busy_hist[1:]))

    @property
    def idle_intervals(self) -> int:
        return int(self.busy_hist[0]) if self.busy_hist else 0

    def busy_pmf(self) -> np.ndarray:
        h = np.asarray(self.busy_hist, dtype=float)
        return h / h.sum() if h.sum() else h

    def stderr(self, metric: str) -> float:
        """Standard error of ``metric`` across replications (0 with one replication)."""
        vals = np.array([s[metric] for s in self.per_seed], dtype=float)
        if len(vals) < 2:
            return 0.0
        return float(vals.std(ddof=1) / np.sqrt(len(vals)))

    def summary(self) -> dict:
        return {
            "n_slots": self.n_slots,
            "n_info": self.n_info,
            "delivered": self.delivered,
            "mean_delay": self.mean_delay,
            "delay_per_slot": self.delay_per_slot,
            "gt": self.gt,
            "per": self.per,
            "busy_periods": self.busy_periods,
            "idle_intervals": self.idle_intervals,
            "dependence_events": self.dependence_events,
            "ops": self.ops,
            "ops_per_info": self.ops_per_info,
            "retransmissions": self.retransmissions,
        }

    # -- combination / serialisation -----------------------------------------

    def merge(self, other: SimReport) -> SimReport:
        return SimReport(
            scenario=self.scenario,
            n_slots=self.n_slots + other.n_slots,
            n_info=self.n_info + other.n_info,
            delivered=self.delivered + other.delivered,
            delay_sum=self.delay_sum + other.delay_sum,
            delay_sq_sum=self.delay_sq_sum + other.delay_sq_sum,
            delay_hist=_pad_add(self.delay_hist, other.delay_hist),
            busy_hist=_pad_add(self.busy_hist, other.busy_hist),
            open_intervals=self.open_intervals + other.open_intervals,
            censored=self.censored + other.censored,
            dependence_events=self.dependence_events + other.dependence_events,
            ops=self.ops + other.ops,
            subtract_ops=self.subtract_ops + other.subtract_ops,
            busy_ops=self.busy_ops + other.busy_ops,
            retransmissions=self.retransmissions + other.retransmissions,
            flags=sorted(set(self.flags) | set(other.flags)),
            per_seed=self.per_seed + other.per_seed,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["summary"] = self.summary()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> SimReport:
        d = dict(d)
        d.pop("summary", None)
        return cls(**d)


# -- vector engine ----------------------------------------------------------------


def _reflected(steps: np.ndarray) -> np.ndarray:
    """D_j = max(D_{j-1} + steps_j, 0) from D_0 = 0, vectorised along the last axis."""
    W = np.cumsum(steps, axis=-1)
    floor = np.minimum.accumulate(np.minimum(W, 0), axis=-1)
    return W - floor


def _vector_single(sc: Scenario, seed: int, rep: int) -> SimReport:
    code = sc.code
    P, c = code.period, code.coded_per_period
    m = P - c
    n_int = sc.N // P
    rng = make_rng(seed, rep)
    mask = sc.channel.erasure_mask(sc.N, rng).reshape(n_int, P)
    info_er = mask[:, :m].sum(axis=1).astype(np.int64)
    X = mask.sum(axis=1).astype(np.int64)
    D = _reflected(X - c)
    D_prev = np.concatenate(([0], D[:-1]))

    starts = np.flatnonzero((D_prev == 0) & (info_er > 0))
    idle = int(np.sum((D_prev == 0) & (info_er == 0)))
    zeros = np.flatnonzero(D == 0)
    pos = np.searchsorted(zeros, starts)
    closed = pos < len(zeros)
    ends = np.where(closed, zeros[np.minimum(pos, len(zeros) - 1)], n_int - 1)

    # slot (1-based) of the erasure that opened each period
    q = np.argmax(mask[starts, :m], axis=1) + 1
    t_tilde = starts * P + q
    # closing slot: the r-th received coded packet of the last interval
    T = np.full(len(starts), np.iinfo(np.int64).max, dtype=np.int64)
    if closed.any():
        e = ends[closed]
        r = D_prev[e] + info_er[e]
        got = np.cumsum(~mask[e, m:], axis=1)
        k = np.argmax(got >= r[:, None], axis=1)
        T[closed] = e * P + m + k + 1

    S = ends[closed] - starts[closed] + 1
    busy_hist = np.bincount(S, minlength=1).astype(np.int64)
    busy_hist[0] = idle

    # per-packet delays: an info slot x is held until the T of the period covering it
    slots = np.arange(1, sc.N + 1).reshape(n_int, P)[:, :m].ravel()
    idx = np.searchsorted(t_tilde, slots, side="right") - 1
    held = idx >= 0
    Tx = np.where(held, T[np.maximum(idx, 0)], 0) if len(T) else np.zeros_like(slots)
    held &= slots < Tx
    lost = held & (Tx == np.iinfo(np.int64).max)
    delays = np.where(held & ~lost, Tx - slots, 0)[~lost]
    n_info = len(slots)
    delivered = n_info - int(lost.sum())
    hist = np.bincount(delays).astype(np.int64) if len(delays) else np.zeros(1, np.int64)
    rep_ = SimReport(
        scenario=sc.to_dict(),
        n_slots=sc.N,
        n_info=n_info,
        delivered=delivered,
        delay_sum=int(delays.sum()),
        delay_sq_sum=int(np.sum(delays.astype(np.float64) ** 2)),
        delay_hist=hist.tolist(),
        busy_hist=busy_hist.tolist(),
        open_intervals=int(n_int - starts[~closed][0]) if (~closed).any() else 0,
        censored=int((~closed).sum()),
    )
    return _finish(rep_, sc, seed, rep)


# -- codec engine -------------------------------------------------------------------


def _codec_single(sc: Scenario, seed: int, rep: int) -> SimReport:
    code = sc.code
    F = gf_field(sc.field_bits)
    chan_rng = make_rng(seed, rep, 0)
    code_rng = make_rng(seed, rep, 1)
    data_rng = make_rng(seed, rep, 2)
    n_info = sc.N // code.period * code.info_per_period
    info = F.random(data_rng, (n_info, sc.payload_symbols))
    dec = Decoder(F, code.period, ideal=sc.ideal_recovery)
    # the channel is sampled lazily in blocks so retransmissions can extend the run
    erasures = _LazyMask(sc.channel, chan_rng)
    retrans = 0
    if code.variant == "block":
        slot, retrans = _run_block(sc, info, F, code_rng, dec, erasures)
    else:
        slot = _run_sliding(sc, info, F, code_rng, dec, erasures)
    delays = dec.delays()
    hist = np.bincount(delays).astype(np.int64) if len(delays) else np.zeros(1, np.int64)
    S = [b.S for b in dec.busy]
    busy_hist = np.bincount(np.array(S, dtype=np.int64), minlength=1)
    busy_hist[0] = dec.idle_intervals
    report = SimReport(
        scenario=sc.to_dict(),
        n_slots=slot,
        n_info=n_info,
        delivered=len(dec.deliveries),
        delay_sum=int(delays.sum()),
        delay_sq_sum=int(np.sum(delays.astype(np.float64) ** 2)),
        delay_hist=hist.tolist(),
        busy_hist=busy_hist.tolist(),
        censored=int(dec.busy_open),
        open_intervals=(slot - dec._open.t) // code.period if dec.busy_open else 0,
        dependence_events=dec.dependence_events,
        ops=dec.ops,
        subtract_ops=dec.subtract_ops,
        busy_ops=[[b.dim, b.ops] for b in dec.busy],
        retransmissions=retrans,
    )
    # payload check on everything that was delivered
    for d in dec.deliveries[:: max(1, len(dec.deliveries) // 64)]:
        if not np.array_equal(dec.known[d.index], info[d.index - 1]):
            report.flags.append("payload-mismatch")
            break
    return _finish(report, sc, seed, rep)


class _LazyMask:
    """Erasure flags drawn in chunks, so runs may outgrow their nominal length."""

    def __init__(self, channel, rng, chunk: int = 1 << 16):
        self.channel = channel
        self.rng = rng
        self.chunk = chunk
        self.buf = np.zeros(0, dtype=bool)

    def __getitem__(self, slot: int) -> bool:
        while slot > len(self.buf):
            prev = bool(self.buf[-1]) if len(self.buf) else None
            self.buf = np.concatenate((self.buf, self.channel.erasure_mask(self.chunk, self.rng, prev)))
        return bool(self.buf[slot - 1])


def _run_sliding(sc: Scenario, info, F, rng, dec: Decoder, erasures: _LazyMask) -> int:
    enc = SlidingEncoder(sc.code, info, F, rng)
    closed = sc.mode == "closed-loop"
    history: deque[int] = deque([0] * sc.feedback_delay) if closed else deque()
    slot = 0
    while True:
        if closed:
            ack = history.popleft()
        else:
            # Open loop keeps the full history; packets the receiver already
            # holds are subtracted out anyway, so the window starts at its
            # delivered prefix without changing the decoding problem.
            ack = dec.delivered
        pkt = enc.next_packet(ack)
        if pkt is None:
            break
        slot = pkt.slot
        dec.ingest(slot, pkt, erasures[slot])
        if closed:
            history.append(dec.delivered)
    for _ in range(sc.tail_packets):
        ack = history.popleft() if closed else dec.delivered
        pkt = enc.tail_packet(ack)
        slot = pkt.slot
        dec.ingest(slot, pkt, erasures[slot])
        if closed:
            history.append(dec.delivered)
    return slot


def _block_deficit(dec: Decoder, lo: int, hi: int) -> int:
    unknown = [u for u in dec.unknown if lo <= u <= hi]
    if not unknown:
        return 0
    if dec.ideal:
        rows = sum(1 for s in dec._supports if min(s) >= lo and max(s) <= hi)
    else:
        rows = sum(1 for p in dec._rows if lo <= p <= hi)
    return len(unknown) - rows


def _run_block(sc: Scenario, info, F, rng, dec: Decoder, erasures: _LazyMask) -> tuple[int, int]:
    """Block code, open loop (give up on undecodable blocks) or with feedback.

    With feedback the receiver reports, every slot, how many degrees of
    freedom each pending block still lacks.  The report reaches the sender
    ``feedback_delay`` slots later; the sender then queues that many fresh
    coded packets for the block ahead of new data and waits for the next
    report covering them.
    """
    enc = BlockEncoder(sc.code, info, F, rng)
    closed = sc.mode == "closed-loop"
    fd = sc.feedback_delay
    reports: dict[int, dict[int, int]] = {}
    check_at: dict[int, int] = {}  # block -> slot at which the sender reads its next report
    queue: deque[int] = deque()
    retrans = 0
    cap = 20 * sc.N
    while enc.slot < cap:
        if queue:
            pkt = enc.retransmit(queue.popleft())
            retrans += 1
        else:
            pkt = enc.next_packet()
            if pkt is None:
                if not check_at:
                    break
                enc.slot += 1  # silent slot while waiting for feedback
        slot = enc.slot
        if pkt is not None:
            dec.ingest(slot, pkt, erasures[slot])
        b = enc.completed_block if pkt is not None else None
        if b is not None:
            if closed:
                check_at[b] = slot + fd
            else:
                lo, hi = enc.block_range(b)
                dec.abandon([u for u in dec.unknown if lo <= u <= hi], slot)
        if not closed:
            continue
        reports[slot] = {bb: _block_deficit(dec, *enc.block_range(bb)) for bb in check_at}
        reports.pop(slot - fd - 1, None)
        for bb in sorted(check_at):
            if check_at[bb] != slot:
                continue
            missing = reports.get(slot - fd, {}).get(bb, 0)
            if missing == 0:
                del check_at[bb]
                continue
            queue.extend([bb] * missing)
            check_at[bb] = slot + len(queue) + fd
    return enc.slot, retrans


def _finish(report: SimReport, sc: Scenario, seed: int, rep: int) -> SimReport:
    if sc.divergent:
        report.flags.append("divergent")
    report.per_seed = [{
        "seed": seed,
        "rep": rep,
        "n_slots": report.n_slots,
        "delivered": report.delivered,
        "delay_sum": report.delay_sum,
        "mean_delay": report.mean_delay,
        "delay_per_slot": report.delay_per_slot,
        "gt": report.gt,
        "per": report.per,
        "busy_periods": report.busy_periods,
        "dependence_events": report.dependence_events,
        "ops": report.ops,
    }]
    return report


# -- public API ----------------------------------------------------------------------


def run_single(sc: Scenario, seed: int, rep: int = 0) -> SimReport:
    engine = sc.resolved_engine
    if engine == "vector":
        if not sc.ideal_recovery or sc.mode != "open-loop" or sc.code.variant == "block":
            raise ValueError("the vector engine covers open-loop stream/group codes with ideal recovery")
        return _vector_single(sc, seed, rep)
    return _codec_single(sc, seed, rep)


def _run_job(args) -> SimReport:
    sc, seed, rep = args
    return run_single(sc, seed, rep)


def workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run(sc: Scenario, n_workers: int | None = None) -> SimReport:
    """Run every (seed, replication) pair and merge the reports in order."""
    jobs = [(sc, s, r) for s, r in sc.runs()]
    n_workers = workers() if n_workers is None else n_workers
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as ex:
            parts = list(ex.map(_run_job, jobs))
    else:
        parts = [_run_job(j) for j in jobs]
    out = parts[0]
    for p in parts[1:]:
        out = out.merge(p)
    out.scenario = sc.to_dict()
    return out


SWEEP_AXES = ("rate", "epsilon", "c", "block_size")


def _rate_to_l(rate: float) -> int:
    l = round(1 / (1 - rate))
    if l < 2 or abs((l - 1) / l - rate) > 1e-9:
        raise ValueError(f"rate {rate} is not of the form (l-1)/l")
    return l


def with_axis(template: Scenario, axis: str, value) -> Scenario:
    """Copy of ``template`` with one sweep axis set."""
    code = template.code
    if axis == "rate":
        l = _rate_to_l(value)
        if code.variant == "stream":
            code = CodeParams.stream(l)
        elif code.variant == "group":
            code = CodeParams.group(code.c * l, code.c)
        else:
            code = CodeParams.block(code.k * l // (l - 1) if code.k % (l - 1) == 0 else l, code.k if code.k % (l - 1) == 0 else l - 1)
        return replace(template, code=code, padded_from=None)
    if axis == "epsilon":
        ch = template.channel
        ch = IidChannel(value) if isinstance(ch, IidChannel) else GilbertElliottChannel(value, ch.expected_burst)
        return replace(template, channel=ch)
    if axis == "c":
        l = code.period // code.coded_per_period if code.variant == "group" else code.period
        return replace(template, code=CodeParams.group(int(value) * l, int(value)), padded_from=None)
    if axis == "block_size":
        k = int(value)
        rate = code.rate
        n = round(k / rate)
        if abs(k / n - rate) > 1e-9:
            raise ValueError(f"block size {k} cannot keep rate {rate:g}")
        return replace(template, code=CodeParams.block(n, k), padded_from=None)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep(template: Scenario, axis: str, values, n_workers: int | None = None) -> list[tuple[object, SimReport]]:
    """One report per axis value; all points share the template's seeds."""
    return [(v, run(with_axis(template, axis, v), n_workers)) for v in values]


def measure_gt(sc: Scenario, batch: int = 2000) -> np.ndarray:
    """Good-throughput samples, one per (seed, replication), for open-loop streams.

    Recovery is idealised and no tail packets are sent; information packets
    from the start of a busy period still open at the end count as lost.
    """
    code = sc.code
    if code.variant == "block" or sc.mode != "open-loop" or sc.tail_packets:
        raise ValueError("measure_gt needs an open-loop stream or group code without tail packets")
    P, c = code.period, code.coded_per_period
    m = P - c
    n_int = sc.N // P
    n_info = n_int * m
    runs = sc.runs()
    out = np.empty(len(runs))
    for b0 in range(0, len(runs), batch):
        chunk = runs[b0:b0 + batch]
        mask = np.stack([sc.channel.erasure_mask(sc.N, make_rng(s, r)) for s, r in chunk]).reshape(len(chunk), n_int, P)
        X = mask.sum(axis=2, dtype=np.int16)
        D = _reflected((X - c).astype(np.int32))
        open_end = D[:, -1] > 0
        lost = np.zeros(len(chunk), dtype=np.int64)
        if open_end.any():
            Do = D[open_end]
            zero = Do == 0
            # last interval with D = 0 (or -1 when the deficit never cleared)
            last_zero = np.where(zero.any(axis=1), n_int - 1 - np.argmax(zero[:, ::-1], axis=1), -1)
            a = last_zero + 1
            rows = np.flatnonzero(open_end)
            q = np.argmax(mask[rows, a, :m], axis=1)  # 0-based position of the opening erasure
            lost[open_end] = (m - q) + (n_int - 1 - a) * m
        out[b0:b0 + len(chunk)] = (n_info - lost) / sc.N
    return out
