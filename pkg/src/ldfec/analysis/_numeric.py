"""Small numeric helpers shared by the analysis modules."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

EXACT_COMB_LIMIT = 4000


class DivergenceError(ValueError):
    """Raised when the busy time is not positive recurrent (load >= 1)."""


def check_stream(l: int, eps: float) -> None:
    if l < 2:
        raise ValueError(f"l must be >= 2, got {l}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
    if l * eps >= 1.0:
        raise DivergenceError(f"diverges: l*eps = {l * eps:g} >= 1, the busy time has no stationary law")


def check_group(lg: int, c: int, eps: float) -> None:
    if not 1 <= c < lg:
        raise ValueError(f"need 1 <= c < lg, got lg={lg}, c={c}")
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {eps}")
    if lg * eps >= c:
        raise DivergenceError(f"diverges: lg*eps = {lg * eps:g} >= c = {c}, the busy time has no stationary law")


def log_comb(n, k):
    """log C(n, k); exact integers for small n, log-gamma beyond."""
    if np.ndim(n) == 0 and np.ndim(k) == 0:
        n, k = int(n), int(k)
        if k < 0 or k > n:
            return -math.inf
        if n <= EXACT_COMB_LIMIT:
            return math.log(math.comb(n, k))
        return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    with np.errstate(invalid="ignore"):
        out = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
    return np.where((k < 0) | (k > n), -np.inf, out)


def log_int(x: int) -> float:
    """Natural log of a (possibly huge) nonnegative integer."""
    return math.log(x) if x > 0 else -math.inf


def xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0 else x * math.log(y)


def kl_bernoulli(a: float, p: float) -> float:
    """Kullback-Leibler divergence D(a || p) between Bernoulli laws."""
    if p <= 0.0:
        return math.inf if a > 0 else 0.0
    if p >= 1.0:
        return math.inf if a < 1 else 0.0
    return xlogy(a, a / p) + xlogy(1 - a, (1 - a) / (1 - p))


def binomial_upper_tail_bound(n: int, m: int, p: float) -> float:
    """Chernoff bound on P(Bin(n, p) >= m), valid for m/n > p."""
    if m > n:
        return 0.0
    a = m / n
    if a <= p:
        return 1.0
    return math.exp(-n * kl_bernoulli(a, p))


def smallest_k(bound, tol: float, k_cap: int = 10**7) -> int:
    """Smallest k >= 1 with bound(k) <= tol, assuming bound is eventually decreasing."""
    hi = 1
    while bound(hi) > tol:
        hi *= 2
        if hi > k_cap:
            raise OverflowError("tail tolerance not reachable within the size cap")
    lo = hi // 2
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if bound(mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi
