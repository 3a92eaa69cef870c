"""Encoders and an in-order decoder for the low-delay stream code.

Three slot layouts are supported:

* ``stream``: one coded packet after every l-1 information packets,
* ``group``: c coded packets after every lg-c information packets,
* ``block``: k systematic packets then n-k coded packets per block.

Stream and group coded packets cover every information packet sent so
far (or, with feedback, everything past the acknowledged prefix).  Block
coded packets only cover their own block.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .gf import GF2m

VARIANTS = ("stream", "group", "block")


@dataclass(frozen=True)
class CodeParams:
    """Shape of a code.  Use the ``stream``/``group``/``block`` constructors."""

    variant: str
    l: int | None = None
    lg: int | None = None
    c: int | None = None
    n: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown code variant {self.variant!r}")
        if self.variant == "stream":
            if self.l is None or self.l < 2:
                raise ValueError("stream code needs l >= 2")
        elif self.variant == "group":
            if self.lg is None or self.c is None or not 1 <= self.c < self.lg:
                raise ValueError("group code needs 1 <= c < lg")
        else:
            if self.n is None or self.k is None or not 1 <= self.k <= self.n:
                raise ValueError("block code needs 1 <= k <= n")

    @classmethod
    def stream(cls, l: int) -> CodeParams:
        return cls("stream", l=l)

    @classmethod
    def group(cls, lg: int, c: int) -> CodeParams:
        return cls("group", lg=lg, c=c)

    @classmethod
    def block(cls, n: int, k: int) -> CodeParams:
        return cls("block", n=n, k=k)

    @property
    def period(self) -> int:
        """Slots per repeating interval (l, lg or n)."""
        return {"stream": self.l, "group": self.lg, "block": self.n}[self.variant]

    @property
    def coded_per_period(self) -> int:
        return {"stream": 1, "group": self.c, "block": (self.n or 0) - (self.k or 0)}[self.variant]

    @property
    def info_per_period(self) -> int:
        return self.period - self.coded_per_period

    @property
    def rate(self) -> float:
        return self.info_per_period / self.period

    def is_coded_slot(self, slot: int) -> bool:
        return (slot - 1) % self.period >= self.info_per_period

    def coded_mask(self, n_slots: int) -> np.ndarray:
        """Boolean mask over slots 1..n_slots marking coded-packet slots."""
        pos = np.arange(n_slots) % self.period
        return pos >= self.info_per_period

    def to_dict(self) -> dict:
        keys = {"stream": ("l",), "group": ("lg", "c"), "block": ("n", "k")}[self.variant]
        return {"variant": self.variant, **{k: getattr(self, k) for k in keys}}


@dataclass
class Packet:
    """A packet on the wire.

    Information packets are the degenerate window ``[index, index]`` with
    coefficient 1.  ``lo``/``hi`` are inclusive information-packet indices.
    """

    slot: int
    kind: str
    index: int
    lo: int
    hi: int
    coeffs: np.ndarray
    payload: np.ndarray

    @property
    def is_info(self) -> bool:
        return self.kind == "info"

    @property
    def window(self) -> tuple[int, int]:
        return self.lo, self.hi

    def __repr__(self) -> str:
        tag = f"u{self.index}" if self.is_info else f"c{self.index}[{self.lo},{self.hi}]"
        return f"<{tag}@{self.slot}>"


def _info_packet(slot: int, j: int, payload: np.ndarray, F: GF2m) -> Packet:
    return Packet(slot, "info", j, j, j, np.ones(1, dtype=F.dtype), payload)


AckPolicy = Callable[[int], int] | Mapping[int, int] | None


def _ack_lookup(policy: AckPolicy) -> Callable[[int], int]:
    if policy is None or policy == "full-history":
        return lambda slot: 0
    if callable(policy):
        return policy
    return lambda slot: policy.get(slot, 0)


class SlidingEncoder:
    """Stream/group encoder emitting one packet per call.

    ``ack`` passed to :meth:`next_packet` is the receiver's delivered
    prefix as currently known to the sender; the coding window then starts
    just past it.
    """

    def __init__(self, params: CodeParams, info: np.ndarray, F: GF2m, rng: np.random.Generator):
        if params.variant == "block":
            raise ValueError("use BlockEncoder for block codes")
        self.params = params
        self.info = np.asarray(info, dtype=F.dtype)
        if self.info.ndim == 1:
            self.info = self.info[:, None]
        self.F = F
        self.rng = rng
        self.slot = 0
        self.sent_info = 0
        self.sent_coded = 0

    @property
    def exhausted(self) -> bool:
        return self.sent_info >= len(self.info) and not self.params.is_coded_slot(self.slot + 1)

    def next_packet(self, ack: int = 0) -> Packet | None:
        """Packet for the next slot, or None once the information stream ends."""
        nxt = self.slot + 1
        if self.params.is_coded_slot(nxt):
            self.slot = nxt
            return self._coded(ack)
        if self.sent_info >= len(self.info):
            return None
        self.slot = nxt
        self.sent_info += 1
        j = self.sent_info
        return _info_packet(self.slot, j, self.info[j - 1], self.F)

    def tail_packet(self, ack: int = 0) -> Packet:
        """Extra coded packet appended after the stream ends."""
        self.slot += 1
        return self._coded(ack)

    def _coded(self, ack: int) -> Packet:
        hi = self.sent_info
        lo = max(1, min(ack + 1, hi))
        width = hi - lo + 1
        coeffs = self.F.random(self.rng, width)
        payload = self.F.dot(coeffs, self.info[lo - 1:hi])
        self.sent_coded += 1
        return Packet(self.slot, "coded", self.sent_coded, lo, hi, coeffs, payload)


class BlockEncoder:
    """Systematic random linear block encoder with optional retransmissions."""

    def __init__(self, params: CodeParams, info: np.ndarray, F: GF2m, rng: np.random.Generator):
        if params.variant != "block":
            raise ValueError("BlockEncoder needs a block code")
        self.params = params
        self.info = np.asarray(info, dtype=F.dtype)
        if self.info.ndim == 1:
            self.info = self.info[:, None]
        self.F = F
        self.rng = rng
        self.slot = 0
        self.sent_coded = 0
        self._pos = 0  # position within the block schedule
        self._block = 1
        self.sent_info = 0
        self.completed_block: int | None = None  # block whose schedule ended with the last packet

    @property
    def n_blocks(self) -> int:
        return math.ceil(len(self.info) / self.params.k)

    def block_range(self, b: int) -> tuple[int, int]:
        k = self.params.k
        return (b - 1) * k + 1, min(b * k, len(self.info))

    def block_of(self, j: int) -> int:
        return (j - 1) // self.params.k + 1

    def next_packet(self) -> Packet | None:
        self.completed_block = None
        if self._block > self.n_blocks:
            return None
        lo, hi = self.block_range(self._block)
        n_info = hi - lo + 1
        self.slot += 1
        if self._pos < n_info:
            j = lo + self._pos
            pkt = _info_packet(self.slot, j, self.info[j - 1], self.F)
            self.sent_info += 1
        else:
            pkt = self._coded(self._block)
        self._pos += 1
        if self._pos >= n_info + (self.params.n - self.params.k):
            self.completed_block = self._block
            self._pos = 0
            self._block += 1
        return pkt

    def retransmit(self, block: int) -> Packet:
        """A fresh coded packet for ``block`` in the next slot."""
        self.completed_block = None
        self.slot += 1
        return self._coded(block)

    def _coded(self, block: int) -> Packet:
        lo, hi = self.block_range(block)
        coeffs = self.F.random(self.rng, hi - lo + 1)
        payload = self.F.dot(coeffs, self.info[lo - 1:hi])
        self.sent_coded += 1
        return Packet(self.slot, "coded", self.sent_coded, lo, hi, coeffs, payload)


def encode_stream(info, params: CodeParams, F: GF2m, seed=None, window_policy: AckPolicy = None,
                  tail: int = 0) -> list[Packet]:
    """Slotted packet sequence for a stream (or group) code.

    ``window_policy`` maps a slot to the acknowledged prefix known to the
    sender at that slot (a dict or callable); None keeps the full history.
    """
    ack = _ack_lookup(window_policy)
    enc = SlidingEncoder(params, info, F, np.random.default_rng(seed))
    out = []
    while (pkt := enc.next_packet(ack(enc.slot + 1))) is not None:
        out.append(pkt)
    for _ in range(tail):
        out.append(enc.tail_packet(ack(enc.slot + 1)))
    return out


def encode_group(info, params: CodeParams, F: GF2m, seed=None, tail: int = 0) -> list[Packet]:
    if params.variant != "group":
        raise ValueError("encode_group needs a group code")
    return encode_stream(info, params, F, seed, tail=tail)


def encode_block(info, params: CodeParams, F: GF2m, seed=None) -> list[Packet]:
    enc = BlockEncoder(params, info, F, np.random.default_rng(seed))
    out = []
    while (pkt := enc.next_packet()) is not None:
        out.append(pkt)
    return out


# -- decoding -----------------------------------------------------------------


@dataclass
class BusyPeriod:
    """One pause of in-order delivery.

    ``t_tilde`` is the slot of the information erasure that paused
    delivery, ``t`` the interval boundary before it, ``T`` the slot at
    which all pending erasures were recovered.  ``S`` counts intervals.
    """

    t_tilde: int
    t: int
    T: int | None = None
    S: int | None = None
    dim: int = 0
    ops: int = 0


@dataclass
class Delivery:
    index: int
    tx_slot: int
    slot: int

    @property
    def delay(self) -> int:
        return self.slot - self.tx_slot


class Decoder:
    """Receiver state: generator rows, pivots, delivered prefix, busy log.

    In field mode received coded rows are reduced to the still-unknown
    columns and eliminated incrementally, pivoting on each row's last
    nonzero column so that any fully determined prefix of the unknowns can
    be released immediately.  With ``ideal=True`` no field arithmetic is
    done: a coded row raises the rank whenever a matching argument says a
    generic matrix would, which is the large-field idealisation.
    """

    def __init__(self, F: GF2m | None, period: int, ideal: bool = False):
        if not ideal and F is None:
            raise ValueError("field mode needs a field")
        self.F = F
        self.period = period
        self.ideal = ideal
        self.known: dict[int, np.ndarray | None] = {}
        self.tx_slot: dict[int, int] = {}
        self.unknown: list[int] = []
        self.lost: set[int] = set()
        self.delivered = 0
        self.deliveries: list[Delivery] = []
        self.busy: list[BusyPeriod] = []
        self._open: BusyPeriod | None = None
        self._ops_at_open = 0
        self._dim = 0
        self.ops = 0
        self.subtract_ops = 0
        self.dependence_events = 0
        self.idle_intervals = 0
        self._interval_busy = False
        self.last_slot = 0
        # field mode: pivot column -> [row dict, payload]
        self._rows: dict[int, list] = {}
        # ideal mode
        self._shadow: dict[int, np.ndarray | None] = {}
        self._supports: list[set[int]] = []
        self._match: dict[int, int] = {}

    # -- public --------------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self._supports) if self.ideal else len(self._rows)

    @property
    def busy_open(self) -> bool:
        return self._open is not None

    def ingest(self, slot: int, packet: Packet, erased: bool = False) -> list[Delivery]:
        """Process one slot; returns the deliveries it triggered."""
        if slot <= self.last_slot:
            raise ValueError("slots must arrive in increasing order")
        self.last_slot = slot
        before = len(self.deliveries)
        if self._open is not None:
            self._interval_busy = True
        if packet.is_info:
            j = packet.index
            self.tx_slot[j] = slot
            if erased:
                self._erase(j, slot, packet.payload)
            else:
                self.known[j] = packet.payload
        elif not erased:
            self._coded(packet)
        self._try_decode(slot)
        self._deliver(slot)
        if slot % self.period == 0:
            if not self._interval_busy and self._open is None:
                self.idle_intervals += 1
            self._interval_busy = self._open is not None
        return self.deliveries[before:]

    def abandon(self, indices, slot: int) -> None:
        """Give up on unknown packets (open-loop block failure)."""
        drop = set(indices) & set(self.unknown)
        if not drop:
            return
        self.lost |= drop
        self.unknown = [u for u in self.unknown if u not in drop]
        if self.ideal:
            keep = [s for s in self._supports if not s & drop]
            self._supports = [s - drop for s in keep if s - drop]
            self._rebuild_matching()
        else:
            self._rows = {p: r for p, r in self._rows.items() if p not in drop and not (set(r[0]) & drop)}
        self._deliver(slot)
        if not self.unknown:
            self._close(slot)

    def undelivered(self) -> list[int]:
        return [j for j in sorted(self.tx_slot) if j > self.delivered and j not in self.lost]

    def delays(self) -> np.ndarray:
        return np.array([d.delay for d in self.deliveries], dtype=np.int64)

    # -- internals -------------------------------------------------------------

    def _erase(self, j: int, slot: int, payload) -> None:
        self.unknown.append(j)
        self.unknown.sort()
        self._shadow[j] = payload
        if self._open is None:
            t = (slot // self.period) * self.period
            self._open = BusyPeriod(t_tilde=slot, t=t)
            self._ops_at_open = self.ops
            self._dim = 0
            self._interval_busy = True

    def _coded(self, pkt: Packet) -> None:
        unknown = set(self.unknown)
        support = [j for j in range(pkt.lo, pkt.hi + 1) if j in unknown]
        if any(j in self.lost for j in range(pkt.lo, pkt.hi + 1)):
            return
        if not support:
            return
        if self.ideal:
            self._add_support(set(support))
            return
        F = self.F
        payload = np.array(pkt.payload, copy=True)
        row = {}
        for off, w in enumerate(map(int, pkt.coeffs)):
            j = pkt.lo + off
            if j in unknown:
                if w:
                    row[j] = w
            elif w:
                payload = F.axpy(w, self.known[j], payload)
                self.subtract_ops += 2
        self._add_row(row, payload)

    def _add_row(self, row: dict[int, int], payload: np.ndarray) -> None:
        F = self.F
        while row:
            p = max(row)
            if p not in self._rows:
                break
            f = row.pop(p)
            prow, ppay = self._rows[p]
            for j, v in prow.items():
                if j == p:
                    continue
                nv = row.get(j, 0) ^ F.mul(f, v)
                self.ops += 2
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            payload = F.axpy(f, ppay, payload)
            self.ops += 2
        if not row:
            self.dependence_events += 1
            return
        p = max(row)
        inv = F.inv(row[p])
        self.ops += 1
        for j in row:
            if j != p:
                row[j] = F.mul(row[j], inv)
                self.ops += 1
        row[p] = 1
        payload = F.scale(inv, payload)
        self.ops += 1
        self._rows[p] = [row, payload]

    def _add_support(self, support: set[int]) -> None:
        rid = len(self._supports)
        self._supports.append(support)
        if not self._augment(rid, set()):
            self._supports.pop()
            self.dependence_events += 1

    def _augment(self, rid: int, seen: set[int]) -> bool:
        for col in sorted(self._supports[rid]):
            if col in seen:
                continue
            seen.add(col)
            other = self._match.get(col)
            if other is None or self._augment(other, seen):
                self._match[col] = rid
                return True
        return False

    def _rebuild_matching(self) -> None:
        self._match = {}
        rows = self._supports
        self._supports = []
        for s in rows:
            self._add_support(s)

    def _decodable_prefix(self) -> int:
        if self.ideal:
            for m in range(len(self.unknown), 0, -1):
                cols = set(self.unknown[:m])
                rows = [s for s in self._supports if s <= cols]
                if len(rows) >= m and _matching_size(rows) == m:
                    return m
            return 0
        m = 0
        for u in self.unknown:
            if u not in self._rows:
                break
            m += 1
        return m

    def _try_decode(self, slot: int) -> None:
        m = self._decodable_prefix()
        if m == 0:
            return
        cols = self.unknown[:m]
        if self.ideal:
            for j in cols:
                self.known[j] = self._shadow.pop(j)
            done = set(cols)
            self._supports = [s - done for s in self._supports if not s <= done]
            self._supports = [s for s in self._supports if s]
            self._rebuild_matching()
        else:
            F = self.F
            for j in cols:
                row, payload = self._rows.pop(j)
                for i, v in row.items():
                    if i != j:
                        payload = F.axpy(v, self.known[i], payload)
                        self.ops += 2
                self.known[j] = payload
                self._shadow.pop(j, None)
            done = set(cols)
            for p, (row, payload) in self._rows.items():
                for i in [i for i in row if i in done]:
                    self._rows[p][1] = payload = F.axpy(row.pop(i), self.known[i], payload)
                    self.ops += 2
        self._dim += m
        self.unknown = self.unknown[m:]
        if not self.unknown:
            self._close(slot)

    def _close(self, slot: int) -> None:
        b = self._open
        if b is None:
            return
        b.T = slot
        b.S = math.ceil((slot - b.t) / self.period)
        b.dim = self._dim
        b.ops = self.ops - self._ops_at_open
        self.busy.append(b)
        self._open = None

    def _deliver(self, slot: int) -> None:
        while True:
            j = self.delivered + 1
            if j in self.lost:
                self.delivered = j
                continue
            if j not in self.known or j not in self.tx_slot:
                break
            self.delivered = j
            self.deliveries.append(Delivery(j, self.tx_slot[j], slot))


def _matching_size(rows: list[set[int]]) -> int:
    match: dict[int, int] = {}

    def aug(r: int, seen: set[int]) -> bool:
        for col in sorted(rows[r]):
            if col in seen:
                continue
            seen.add(col)
            if col not in match or aug(match[col], seen):
                match[col] = r
                return True
        return False

    return sum(aug(r, set()) for r in range(len(rows)))


def decoder_for(params: CodeParams, F: GF2m | None, ideal: bool = False) -> Decoder:
    return Decoder(F, params.period, ideal=ideal)


def per_packet_delay(deliveries, n_info: int | None = None):
    """Delay samples (slots) and the indices never delivered.

    Returns ``(delays, undelivered)`` where delays are ordered by packet
    index and undelivered lists indices in ``1..n_info`` with no delivery.
    """
    got = {d.index: d.delay for d in deliveries}
    delays = np.array([got[j] for j in sorted(got)], dtype=np.int64)
    if n_info is None:
        n_info = max(got, default=0)
    missing = [j for j in range(1, n_info + 1) if j not in got]
    return delays, missing
