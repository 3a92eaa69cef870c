"""Busy-time law of the stream code and the quantities derived from it.

Time is cut into intervals of l slots (l-1 information slots then one
coded slot).  Under the idealisation that every received coded packet
repairs one pending erasure, the deficit after interval j is the
reflected walk ``D_j = max(D_{j-1} + X_j - 1, 0)`` where X_j counts the
erasures of interval j.  S is the number of intervals a busy period
lasts, with S = 0 marking an idle interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._numeric import (
    DivergenceError,
    binomial_upper_tail_bound,
    check_stream,
    log_comb,
    smallest_k,
)

DEFAULT_TAIL = 1e-12


@dataclass
class BusyTimePmf:
    """Truncated busy-time distribution with a certified bound on the rest."""

    params: dict
    probs: np.ndarray
    tail_bound: float
    meta: dict = field(default_factory=dict)

    @property
    def s_max(self) -> int:
        return len(self.probs) - 1

    def __getitem__(self, s: int) -> float:
        return float(self.probs[s]) if 0 <= s < len(self.probs) else 0.0

    def __len__(self) -> int:
        return len(self.probs)

    @property
    def total(self) -> float:
        return math.fsum(self.probs)

    def moment(self, r: int) -> float:
        s = np.arange(len(self.probs), dtype=float)
        return math.fsum(s**r * self.probs)

    def to_rows(self) -> list[dict]:
        return [{"s": s, "p": float(p)} for s, p in enumerate(self.probs)]


def busy_time_log_prob(s, l: int, eps: float):
    """log P(S = s); works for any epsilon (the law is defective once l*eps >= 1)."""
    s_arr = np.asarray(s)
    if eps == 0.0:
        out = np.where(s_arr == 0, 0.0, -np.inf)
        return float(out) if out.ndim == 0 else out
    le, l1e = math.log(eps), math.log1p(-eps)
    s_f = s_arr.astype(float)
    with np.errstate(divide="ignore"):
        body = (math.log(l - 1) - np.log(np.maximum(s_f, 1)) + s_f * le + s_f * (l - 1) * l1e
                + log_comb((s_f - 1) * l, s_f - 1))
    out = np.where(s_arr == 0, (l - 1) * l1e, body)
    return float(out) if out.ndim == 0 else out


def busy_time_prob(s, l: int, eps: float):
    """P(S = s) for the stream code with l slots per coded packet."""
    if l < 2:
        raise ValueError("l must be >= 2")
    if s is not None and np.ndim(s) == 0 and int(s) < 0:
        return 0.0
    return np.exp(busy_time_log_prob(s, l, eps))


def busy_tail_bound(k: int, l: int, eps: float) -> float:
    """Certified bound on P(S > k).

    S > k needs the deficit to stay positive through k intervals, hence at
    least k+1 erasures among the first k*l slots; a Chernoff bound on that
    binomial tail is returned.
    """
    if eps == 0.0:
        return 0.0
    return binomial_upper_tail_bound(k * l, k + 1, eps)


def busy_s_max(l: int, eps: float, tail_tolerance: float = DEFAULT_TAIL) -> int:
    check_stream(l, eps)
    if eps == 0.0:
        return 0
    return smallest_k(lambda k: busy_tail_bound(k, l, eps), tail_tolerance)


def busy_time_pmf(l: int, epsilon: float, tail_tolerance: float = DEFAULT_TAIL) -> BusyTimePmf:
    check_stream(l, epsilon)
    k = busy_s_max(l, epsilon, tail_tolerance)
    probs = busy_time_prob(np.arange(k + 1), l, epsilon)
    probs = np.atleast_1d(np.asarray(probs, dtype=float))
    return BusyTimePmf({"l": l, "epsilon": epsilon}, probs, busy_tail_bound(k, l, epsilon))


class BusyMoments(NamedTuple):
    E_S: float
    E_S2: float
    E_S3: float
    E_Splus: float


def busy_time_moments(l: int, epsilon: float) -> BusyMoments:
    """Closed-form E(S), E(S^2), E(S^3) and E(S+) with S+ = max(S, 1)."""
    check_stream(l, epsilon)
    e = epsilon
    d = 1 - l * e
    es = (l - 1) * e * (1 - e) ** (l - 1) / d
    core = l * (l - 1) * e**2 * (1 - e) ** l
    es2 = es + core / d**3
    es3 = es2 + core * (2 - 2 * e - l * e**2 + l**2 * e**2) / d**5
    esp = (1 - e) ** l / d
    return BusyMoments(es, es2, es3, esp)


def third_moment_table_form(l: int, epsilon: float) -> float:
    """The alternative E(S^3) expression behind the published cost table.

    It differs from the true third moment (see :func:`busy_time_moments`)
    in the cubic factor; kept so the published cost figures can be
    reproduced alongside the exact ones.
    """
    check_stream(l, epsilon)
    e = epsilon
    d = 1 - l * e
    core = l * (l - 1) * e**2 * (1 - e) ** l
    poly = 2 - 2 * e - 2 * l * e**2 + l * e + l**2 * e**3
    return busy_time_moments(l, e).E_S2 + core * poly / d**5


def delay_upper_bound(l: int, epsilon: float) -> float:
    """Long-run in-order delay bound E(S^2)(l-1) / (2 E(S+)).

    This is a renewal-reward ratio of worst-case sum-delay per busy period
    to slots per cycle, i.e. total delay divided by transmitted slots.
    """
    m = busy_time_moments(l, epsilon)
    return m.E_S2 * (l - 1) / (2 * m.E_Splus)


def delay_upper_bound_per_info(l: int, epsilon: float) -> float:
    """Same bound renormalised per information packet (factor l/(l-1))."""
    return delay_upper_bound(l, epsilon) * l / (l - 1)


def worst_case_sum_delay(s: int, l: int) -> int:
    """Largest possible total delay of a busy period lasting s intervals."""
    return s * s * l * (l - 1) // 2


def decoding_cost(l: int, epsilon: float, exact: bool = False) -> float:
    """Decoder arithmetic per information packet in the long run.

    Uses the published third-moment expression unless ``exact`` is set, in
    which case the true E(S^3) is used.
    """
    check_stream(l, epsilon)
    if epsilon == 0.0:
        return 0.0
    es3 = busy_time_moments(l, epsilon).E_S3 if exact else third_moment_table_form(l, epsilon)
    return 1.5 * (1 - l * epsilon) / ((l - 1) * (1 - epsilon) ** l) * es3


def throughput_tail(l: int, epsilon: float, N: int, R0: float) -> float:
    """Lower bound on P(GT > R0) for a stream of N slots."""
    rate = (l - 1) / l
    if R0 >= rate:
        raise ValueError(f"R0 must be below the code rate {rate:g}")
    check_stream(l, epsilon)
    if epsilon == 0.0:
        return 1.0
    f = N * (rate - R0) / (l - 1)
    delta = 0.5 * math.exp(-f * (1 - l * epsilon) ** 2 / (l * epsilon * (1 - epsilon)))
    return 1.0 - delta


def renewal_rate(l: int, epsilon: float) -> float:
    """Busy periods (S >= 1) per interval in the long run."""
    m = busy_time_moments(l, epsilon)
    return (1 - (1 - epsilon) ** (l - 1)) / m.E_Splus


# -- combinatorial identities behind the pmf ----------------------------------


def binomial_identity_sides(k: int, l: int) -> tuple[int, int]:
    """Both sides of sum_{r=2}^{min(k,l)} (r-1) C(l,r) C(l(k-1), k-r) = C((k-1)l, k)."""
    lhs = sum((r - 1) * math.comb(l, r) * math.comb(l * (k - 1), k - r) for r in range(2, min(k, l) + 1))
    return lhs, math.comb((k - 1) * l, k)


def cycle_lemma_count(k: int, r: int, l: int) -> tuple[int, int]:
    """(admissible, total) placements of k-r further erasures over k intervals.

    A busy period opened with r erasures stays open through interval j < k
    exactly when the cumulative erasure count E_j satisfies r + E_j > j.
    The cycle lemma says admissible/total = r/k.
    """
    from itertools import combinations

    n = k * l
    good = total = 0
    for pos in combinations(range(n), k - r):
        total += 1
        counts = np.bincount(np.array(pos, dtype=int) // l, minlength=k) if pos else np.zeros(k, int)
        cum = np.cumsum(counts)
        if all(r + cum[j - 1] > j for j in range(1, k)):
            good += 1
    return good, total


__all__ = [
    "BusyMoments",
    "BusyTimePmf",
    "DivergenceError",
    "busy_s_max",
    "busy_tail_bound",
    "busy_time_log_prob",
    "busy_time_moments",
    "busy_time_pmf",
    "busy_time_prob",
    "decoding_cost",
    "delay_upper_bound",
    "delay_upper_bound_per_info",
    "binomial_identity_sides",
    "renewal_rate",
    "cycle_lemma_count",
    "third_moment_table_form",
    "throughput_tail",
    "worst_case_sum_delay",
]
