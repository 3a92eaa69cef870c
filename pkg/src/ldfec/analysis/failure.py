"""Decoding-failure bounds for finite fields.

A busy period of dimension k produces a k x k decoding matrix whose
column i is random on the rows received after the i-th pending erasure
and zero above.  If Z_i rows had already arrived when erasure i happened,
the matrix is invertible with probability prod_i (1 - Q^(Z_i - i)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numeric import check_stream
from .busy import DEFAULT_TAIL, busy_time_pmf
from .oracles import MAX_ORACLE_SLOTS, _CHUNK_BITS


def rank_bounds(k: int, Q: float) -> tuple[float, float]:
    """(lower, upper) bounds on the full-rank probability of a k-dimensional busy period."""
    if k < 1 or Q < 2:
        raise ValueError("need k >= 1 and Q >= 2")
    upper = math.prod(1 - Q ** -(k - j) for j in range(k))
    lower = Q / (Q + 1) * (1 - Q**-2) ** k
    return lower, upper


def full_rank_probability(Z, Q: float) -> float:
    """prod_i (1 - Q^(Z_i - i)) for zero counts Z (1-based i)."""
    out = 1.0
    for i, z in enumerate(Z, start=1):
        if z >= i:
            return 0.0
        out *= 1 - float(Q) ** (z - i)
    return out


def zero_counts(E) -> list[int]:
    """Column zero counts for per-interval erasure counts E of one busy period.

    Each interval's coded packet is assumed received, so an erasure in
    interval j sees j-1 earlier rows.
    """
    Z = []
    for j, e in enumerate(E):
        Z.extend([j] * int(e))
    return Z


def sample_admissible_pattern(k: int, rng: np.random.Generator, max_tries: int = 100000) -> list[int]:
    """Per-interval erasure counts (E_1..E_k) summing to k with the period open until k.

    Admissible means sum_{j<=m} E_j > m for m < k.  Sampled uniformly over
    compositions by rejection.
    """
    if k == 1:
        return [1]
    for _ in range(max_tries):
        cuts = np.sort(rng.choice(2 * k - 1, size=k - 1, replace=False))
        parts = np.diff(np.concatenate(([-1], cuts, [2 * k - 1]))) - 1
        cum = np.cumsum(parts)
        if parts[0] >= 1 and all(cum[m - 1] > m for m in range(1, k)):
            return [int(x) for x in parts]
    raise RuntimeError("could not sample an admissible pattern")


def monte_carlo_full_rank(Z, Q_bits: int, samples: int, rng: np.random.Generator) -> float:
    """Fraction of random staircase matrices with zero counts Z that are invertible."""
    from ..gf import batch_rank, field

    F = field(Q_bits)
    k = len(Z)
    rows = np.arange(k)[:, None]
    support = rows >= np.asarray(Z)[None, :]
    hits = 0
    done = 0
    while done < samples:
        n = min(samples - done, 20000)
        M = F.random(rng, (n, k, k)).astype(np.int64) * support[None]
        hits += int(np.sum(batch_rank(F, M) == k))
        done += n
    return hits / samples


def _prefactor(l: int, eps: float) -> float:
    return (1 - l * eps) / (l * (1 - eps) ** l)


def stream_failure_bound(l: int, epsilon: float, Q: float, tail_tolerance: float = 1e-14) -> float:
    """Series bound on decoding failures per transmitted packet, truncated with a certified tail."""
    check_stream(l, epsilon)
    if epsilon == 0.0:
        return 0.0
    pmf = busy_time_pmf(l, epsilon, tail_tolerance)
    r = 1 - float(Q) ** -2
    i = np.arange(1, len(pmf.probs))
    weights = 1 - Q / (Q + 1) * r**i
    return _prefactor(l, epsilon) * math.fsum(weights * pmf.probs[1:])


def solve_epsilon0(l: int, epsilon: float, Q: float, max_iter: int = 200) -> float:
    """Root of x(1-x)^(l-1) = (1 - Q^-2) eps (1-eps)^(l-1) on [0, eps] by bisection."""
    check_stream(l, epsilon)
    target = (1 - float(Q) ** -2) * epsilon * (1 - epsilon) ** (l - 1)

    def g(x):
        return x * (1 - x) ** (l - 1) - target

    lo, hi = 0.0, min(epsilon, 1.0 / l)
    if epsilon == 0.0:
        return 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            return mid
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            return 0.5 * (lo + hi)
    raise ArithmeticError("bisection for epsilon0 did not converge")


def corollary_failure_bound(l: int, epsilon: float, Q: float) -> tuple[float, float]:
    """Closed form of :func:`stream_failure_bound`; returns (bound, epsilon0)."""
    e0 = solve_epsilon0(l, epsilon, Q)
    if epsilon == 0.0:
        return 0.0, 0.0
    val = Q / (Q + 1) * (1 - e0) ** (l - 1) - (1 - epsilon) ** (l - 1) + 1 / (Q + 1)
    return _prefactor(l, epsilon) * val, e0


@dataclass
class FailureBoundReport:
    Q: float
    l: int
    epsilon: float
    series: float
    closed_form: float
    epsilon0: float
    rank_bounds: dict[int, tuple[float, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "Q": self.Q, "l": self.l, "epsilon": self.epsilon, "series": self.series,
            "closed_form": self.closed_form, "epsilon0": self.epsilon0,
            "rank_bounds": {k: list(v) for k, v in self.rank_bounds.items()},
        }


def failure_report(l: int, epsilon: float, Q: float, k_max: int = 10) -> FailureBoundReport:
    closed, e0 = corollary_failure_bound(l, epsilon, Q)
    return FailureBoundReport(
        Q, l, epsilon, stream_failure_bound(l, epsilon, Q), closed, e0,
        {k: rank_bounds(k, Q) for k in range(1, k_max + 1)},
    )


@dataclass
class NumericFailure:
    """Per-packet failure estimate with the matching per-pattern brackets."""

    estimate: float
    lower: float
    upper: float
    k_max: int
    mass: float


def exact_failure_numeric(l: int, epsilon: float, Q: float, k_max: int) -> NumericFailure:
    """Renewal-weighted failure rate from exact per-pattern full-rank probabilities.

    Every slot pattern over k_max intervals is enumerated; busy periods that
    close within k_max intervals contribute P(pattern) * (1 - P(full rank)),
    where the full-rank probability follows from the pattern's zero counts.
    ``lower``/``upper`` replace that probability by the per-dimension upper
    and lower rank bounds.
    """
    check_stream(l, epsilon)
    n_slots = k_max * l
    if n_slots > MAX_ORACLE_SLOTS:
        raise ValueError(f"refusing to enumerate 2^{n_slots} patterns (k_max * l must be <= {MAX_ORACLE_SLOTS})")
    Q = float(Q)
    est = low = up = mass = 0.0
    total = 1 << n_slots
    chunk = 1 << min(_CHUNK_BITS, n_slots)
    log_e = math.log(epsilon) if epsilon > 0 else -math.inf
    log_1e = math.log1p(-epsilon)
    for start in range(0, total, chunk):
        masks = np.arange(start, start + chunk, dtype=np.int64)
        n = len(masks)
        active = np.zeros(n, bool)
        done = np.zeros(n, bool)
        dead = np.zeros(n, bool)  # first interval had no information erasure
        unknown = np.zeros(n, np.int64)
        rows = np.zeros(n, np.int64)
        fr = np.ones(n)
        erasures = np.zeros(n, np.int64)
        for t in range(n_slots):
            bit = ((masks >> t) & 1).astype(bool)
            erasures += bit
            coded = t % l == l - 1
            if not coded:
                start_now = bit & ~active & ~done & ~dead
                active |= start_now
                hit = bit & active
                unknown += hit
                fr = np.where(hit, fr * (1 - Q ** (rows - unknown).astype(float)), fr)
            else:
                got = ~bit & active
                rows += got
                closing = active & (rows == unknown)
                done |= closing
                active &= ~closing
                if t == l - 1:
                    dead |= ~active & ~done
        closed = done
        if not closed.any():
            continue
        w = np.exp(erasures[closed] * log_e + (n_slots - erasures[closed]) * log_1e)
        dims = unknown[closed]
        mass += math.fsum(w)
        est += math.fsum(w * (1 - fr[closed]))
        ub = np.array([rank_bounds(int(d), Q)[1] for d in range(1, k_max + 1)])
        lb = np.array([rank_bounds(int(d), Q)[0] for d in range(1, k_max + 1)])
        low += math.fsum(w * (1 - ub[dims - 1]))
        up += math.fsum(w * (1 - lb[dims - 1]))
    pre = _prefactor(l, epsilon)
    return NumericFailure(pre * est, pre * low, pre * up, k_max, mass)


__all__ = [
    "FailureBoundReport",
    "NumericFailure",
    "corollary_failure_bound",
    "exact_failure_numeric",
    "failure_report",
    "full_rank_probability",
    "monte_carlo_full_rank",
    "rank_bounds",
    "sample_admissible_pattern",
    "solve_epsilon0",
    "stream_failure_bound",
    "zero_counts",
]
