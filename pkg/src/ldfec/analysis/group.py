"""Busy-time law and delay of the group code (c coded packets per lg slots)."""

from __future__ import annotations

import math

import numpy as np

from ._numeric import binomial_upper_tail_bound, check_group, log_comb, log_int, smallest_k
from .busy import DEFAULT_TAIL, BusyTimePmf
from .lattice import group_np_count


def _logf(eps: float, x: int, y: int) -> float:
    """log of eps^x (1-eps)^(y-x)."""
    if eps == 0.0:
        return 0.0 if x == 0 else -math.inf
    return x * math.log(eps) + (y - x) * math.log1p(-eps)


def group_busy_prob(s: int, lg: int, c: int, eps: float) -> float:
    """P(S = s) for the group code; valid for any epsilon."""
    if s < 0:
        return 0.0
    if s == 0:
        return (1 - eps) ** (lg - c)
    if s == 1:
        terms = [
            math.exp(log_comb(lg - c, i) + log_comb(c, j) + _logf(eps, i + j, lg))
            for i in range(1, c + 1)
            for j in range(0, c - i + 1)
            if i <= lg - c
        ]
        return math.fsum(terms)
    terms = []
    for p in range(c):
        n = group_np_count(lg, c, s, p)
        if n:
            terms.append(math.exp(log_int(n) + _logf(eps, s * c - p, s * lg)))
    return math.fsum(terms)


def group_tail_bound(k: int, lg: int, c: int, eps: float) -> float:
    """Bound on P(S > k): needs at least kc+1 erasures among k*lg slots."""
    if eps == 0.0:
        return 0.0
    return binomial_upper_tail_bound(k * lg, k * c + 1, eps)


# Beyond this many erasures the exact counts get slow (big-integer work grows cubically).
LATTICE_ERASURE_LIMIT = 200


def _deficit_recursion(lg: int, c: int, eps: float, k: int) -> np.ndarray:
    """P(S = s) for s = 2..k by propagating the law of the open deficit.

    All terms are nonnegative so this is numerically benign for long
    busy periods, where the signed lattice expansion is expensive.
    """
    x = np.arange(lg + 1)
    b = np.exp(log_comb(lg, x) + x * math.log(eps) + (lg - x) * math.log1p(-eps))
    cdf = np.cumsum(b)
    # v[d-1] = P(still open after j intervals with deficit d); opening needs > c erasures
    v = b[c + 1:].copy()
    out = np.zeros(k + 1)
    for s in range(2, k + 1):
        d = np.arange(1, len(v) + 1)
        close = np.where(c - d >= 0, cdf[np.clip(c - d, 0, lg)], 0.0)
        out[s] = math.fsum(v * close)
        # new deficit d' = d + x - c >= 1
        full = np.convolve(v, b)  # index (d-1) + x
        v = full[c:] if len(full) > c else np.zeros(0)
    return out


def group_busy_pmf(lg: int, c: int, epsilon: float, tail_tolerance: float = DEFAULT_TAIL,
                   method: str = "auto") -> BusyTimePmf:
    """Truncated busy-time law of the group code.

    ``method`` is ``"lattice"`` (pattern counts), ``"recursion"`` (deficit
    propagation) or ``"auto"``, which uses the counts unless the truncation
    point makes them expensive.
    """
    check_group(lg, c, epsilon)
    k = 0 if epsilon == 0.0 else smallest_k(lambda k: group_tail_bound(k, lg, c, epsilon), tail_tolerance)
    if method == "auto":
        method = "lattice" if k * c <= LATTICE_ERASURE_LIMIT else "recursion"
    head = [group_busy_prob(s, lg, c, epsilon) for s in range(min(k, 1) + 1)]
    if method == "lattice":
        probs = np.array(head + [group_busy_prob(s, lg, c, epsilon) for s in range(2, k + 1)])
    elif method == "recursion":
        probs = _deficit_recursion(lg, c, epsilon, k) if k >= 2 else np.zeros(k + 1)
        probs[: len(head)] = head
    else:
        raise ValueError(f"unknown method {method!r}")
    meta = {"method": method}
    return BusyTimePmf({"lg": lg, "c": c, "epsilon": epsilon}, probs, group_tail_bound(k, lg, c, epsilon), meta)


def group_worst_sum_delay(s: int, lg: int, c: int) -> int:
    """Largest total delay of a busy period spanning s group intervals.

    The period opens at the first slot and closes at the last coded slot of
    interval s; every information packet in between waits for that slot.
    """
    m = lg - c
    return m * lg * s * (s + 1) // 2 - s * m * (m + 1) // 2


def group_delay_per_packet(l: int, c: int, epsilon: float, tail_tolerance: float = DEFAULT_TAIL) -> float:
    """Delay bound for the group code at the rate of the stream code with parameter l.

    The group interval is lg = c*l.  As for the stream code this is the
    renewal-reward ratio of worst-case sum-delay per cycle to slots per
    cycle, so c = 1 reproduces the stream bound exactly.
    """
    lg = c * l
    check_group(lg, c, epsilon)
    if epsilon == 0.0:
        return 0.0
    pmf = group_busy_pmf(lg, c, epsilon, tail_tolerance)
    s = np.arange(len(pmf.probs))
    reward = math.fsum(pmf.probs * np.array([group_worst_sum_delay(int(v), lg, c) for v in s], dtype=float))
    e_splus = math.fsum(pmf.probs[1:] * s[1:]) + pmf.probs[0]
    return float(reward / (lg * e_splus))


__all__ = [
    "group_busy_pmf",
    "group_busy_prob",
    "group_delay_per_packet",
    "group_tail_bound",
    "group_worst_sum_delay",
]
