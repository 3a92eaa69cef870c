"""Exhaustive slot-level enumeration of erasure patterns.

Every one of the 2^(k*period) erasure patterns over k intervals is pushed
through the idealised decoder (each received coded packet repairs one
pending erasure).  The results are exact pattern counts, which make these
functions independent oracles for the closed-form busy-time laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MAX_ORACLE_SLOTS = 24
_CHUNK_BITS = 20


@dataclass
class OracleResult:
    """Pattern statistics of the first busy period.

    ``counts[s, e]`` is the number of patterns on the first s intervals
    (s*period slots) whose busy period lasts exactly s intervals and which
    contain e erasures; for s = 0 it counts single-interval idle patterns.
    ``censored[e]`` counts k-interval patterns still busy after k intervals.
    """

    period: int
    c: int
    k: int
    counts: np.ndarray
    censored: np.ndarray

    def probs(self, epsilon) -> list:
        """Exact P(S = s) for s = 0..k; Fractions if ``epsilon`` is a Fraction."""
        out = []
        for s in range(self.k + 1):
            n = max(s, 1) * self.period
            out.append(_weight(self.counts[s], n, epsilon))
        return out

    def tail_mass(self, epsilon):
        return _weight(self.censored, self.k * self.period, epsilon)

    def defective(self, epsilon, tol: float = 1e-9) -> bool:
        """True when the enumerated prefix leaves more than ``tol`` of mass uncovered."""
        return float(self.tail_mass(epsilon)) > tol


def _weight(counts, n: int, epsilon):
    if isinstance(epsilon, Fraction):
        return sum(int(cnt) * epsilon**e * (1 - epsilon) ** (n - e) for e, cnt in enumerate(counts) if cnt)
    terms = [int(cnt) * epsilon**e * (1 - epsilon) ** (n - e) for e, cnt in enumerate(counts) if cnt]
    return math.fsum(terms)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint32)
    x = x - ((x >> 1) & 0x55555555)
    x = (x & 0x33333333) + ((x >> 2) & 0x33333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F
    return ((x * 0x01010101) & 0xFFFFFFFF) >> 24


def oracle_busy_counts(period: int, c: int, k: int) -> OracleResult:
    """Enumerate all patterns over k intervals of ``period`` slots with c coded slots each."""
    if not 1 <= c < period:
        raise ValueError("need 1 <= c < period")
    n_slots = k * period
    if n_slots > MAX_ORACLE_SLOTS:
        raise ValueError(f"refusing to enumerate 2^{n_slots} patterns (limit 2^{MAX_ORACLE_SLOTS})")
    info_bits = (1 << (period - c)) - 1
    full = (1 << period) - 1
    counts = np.zeros((k + 1, n_slots + 1), dtype=np.int64)
    censored = np.zeros(n_slots + 1, dtype=np.int64)
    total = 1 << n_slots
    chunk = 1 << min(_CHUNK_BITS, n_slots)
    for start in range(0, total, chunk):
        masks = np.arange(start, start + chunk, dtype=np.int64)
        # interval j occupies bits [j*period, (j+1)*period), slot order = bit order
        per = [(masks >> (j * period)) & full for j in range(k)]
        X = [_popcount(v).astype(np.int64) for v in per]
        first_info = (per[0] & info_bits) != 0
        D = np.where(first_info, X[0] - c, 0)
        S = np.where(first_info & (D <= 0), 1, 0)
        S = np.where(~first_info, 0, S)
        E = X[0].copy()
        open_ = first_info & (D > 0)
        D = np.maximum(D, 0)
        for j in range(1, k):
            D = np.where(open_, np.maximum(D + X[j] - c, 0), D)
            E = np.where(open_, E + X[j], E)
            closing = open_ & (D == 0)
            S = np.where(closing, j + 1, S)
            open_ = open_ & ~closing
        # patterns are counted on the full k intervals; divide out the free suffix
        for s in range(k + 1):
            sel = ~open_ & (S == s)
            if not sel.any():
                continue
            e_vals = E[sel] if s >= 1 else X[0][sel]
            np.add.at(counts[s], e_vals, 1)
        if open_.any():
            np.add.at(censored, E[open_], 1)
    for s in range(k + 1):
        free = (k - max(s, 1)) * period
        assert np.all(counts[s] % (1 << free) == 0)
        counts[s] //= 1 << free
    return OracleResult(period, c, k, counts, censored)


def oracle_busy_pmf(l: int, epsilon, k_max: int, c: int = 1, lg: int | None = None) -> OracleResult:
    """Oracle for the stream code (``l``) or the group code (``lg``, ``c``)."""
    period = lg if lg is not None else l
    return oracle_busy_counts(period, c, k_max)


def oracle_np_count(lg: int, c: int, s: int, p: int) -> int:
    """Admissible pattern count with sc - p erasures, by enumeration."""
    res = oracle_busy_counts(lg, c, s)
    e = s * c - p
    return int(res.counts[s, e]) if e <= s * lg else 0
