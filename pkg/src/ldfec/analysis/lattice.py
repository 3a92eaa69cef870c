"""Dominated integer sequences and the group-code pattern counts built on them.

``kreweras_count(a, n)`` is the number of nonnegative integer sequences
b_1..b_n whose partial sums satisfy b_1 + ... + b_j <= a_j.  It equals the
determinant of the lower Hessenberg matrix ``M[r][c] = C(a_c + 1, r - c + 1)``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product


def _comb(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


def _check_sequence(a, n: int) -> tuple[int, ...]:
    a = tuple(int(x) for x in a)
    if n < 0 or len(a) < n:
        raise ValueError(f"need a sequence of length >= n = {n}")
    a = a[:n]
    if any(x < 0 for x in a):
        raise ValueError("dominating sequence must be nonnegative")
    if any(y < x for x, y in zip(a, a[1:])):
        raise ValueError("dominating sequence must be nondecreasing")
    return a


def kreweras_matrix(a, n: int) -> list[list[int]]:
    a = _check_sequence(a, n)
    return [[_comb(a[c] + 1, r - c + 1) for c in range(n)] for r in range(n)]


def _bareiss_det(M: list[list[int]]) -> int:
    """Exact integer determinant by fraction-free elimination."""
    n = len(M)
    if n == 0:
        return 1
    A = [row[:] for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def kreweras_count(a, n: int) -> int:
    """Number of sequences dominated by ``a`` (determinant form).

    ``a`` must be nondecreasing; a decreasing step is rejected.
    """
    return _bareiss_det(kreweras_matrix(a, n))


def kreweras_recursion(a, n: int, plus_one: bool = True) -> int:
    """Row expansion of the same determinant.

    ``N(m) = sum_{j=1}^{m} (-1)^(j-1) C(a_{m-j+1} + 1, j) N(m-j)``.  With
    ``plus_one=False`` the ``+1`` inside the binomial is dropped, which is
    a different (and wrong) count; it is kept to document that variant.
    """
    a = _check_sequence(a, n)
    shift = 1 if plus_one else 0
    N = [1]
    for m in range(1, n + 1):
        N.append(sum((-1) ** (j - 1) * _comb(a[m - j] + shift, j) * N[m - j] for j in range(1, m + 1)))
    return N[n]


def kreweras_step(a, n: int, sub_counts, plus_one: bool = True) -> int:
    """One expansion step for N(n) given the counts N(0..n-1)."""
    a = _check_sequence(a, n)
    shift = 1 if plus_one else 0
    return sum((-1) ** (j - 1) * _comb(a[n - j] + shift, j) * sub_counts[n - j] for j in range(1, n + 1))


def kreweras_enumerate(a, n: int) -> int:
    """Brute-force count of dominated sequences."""
    a = tuple(int(x) for x in a[:n])
    if n == 0:
        return 1
    count = 0
    for b in product(*(range(a[j] + 1) for j in range(n))):
        s = 0
        for j, v in enumerate(b):
            s += v
            if s > a[j]:
                break
        else:
            count += 1
    return count


# -- group code patterns --------------------------------------------------------


def group_dominating_sequence(lg: int, c: int, s: int, p: int) -> tuple[int, ...]:
    """Bounds on the number of non-erased slots before each erasure.

    A busy period lasting s >= 2 intervals needs at least jc+1 erasures in
    the first j intervals for j < s, and sc - p erasures in total.  Writing
    b_i for the number of received slots between erasure i-1 and erasure
    i, the (jc+1)-th erasure must fall within the first j*lg slots, giving
    partial-sum bounds j(lg-c) - 1; the last erasures only need to fit in
    s*lg slots.  Earlier erasures inherit the bound of the next
    constrained one, so the sequence is nondecreasing but not strict.
    """
    n = s * c - p
    a = []
    for i in range(1, n + 1):
        if i <= (s - 1) * c + 1:
            j = max(1, math.ceil((i - 1) / c))
            a.append(j * (lg - c) - 1)
        else:
            a.append(s * (lg - c) + p)
    return tuple(a)


class _GroupCounter:
    """Incremental evaluation of the expansion for one (lg, c).

    Dominating sequences for different s share the prefix
    a_i = j(lg-c) - 1, so its partial counts are computed once and only
    the final c-1-p entries are redone per (s, p).
    """

    def __init__(self, lg: int, c: int):
        self.lg = lg
        self.c = c
        self.a: list[int] = []
        self.N: list[int] = [1]

    def _core(self, i: int) -> int:
        j = max(1, math.ceil((i - 1) / self.c))
        return j * (self.lg - self.c) - 1

    def _extend_core(self, m: int) -> None:
        while len(self.N) <= m:
            k = len(self.N)
            self.a.append(self._core(k))
            self.N.append(self._next(self.a, self.N, k))

    @staticmethod
    def _next(a: list[int], N: list[int], m: int) -> int:
        total = 0
        sign = 1
        for j in range(1, m + 1):
            total += sign * _comb(a[m - j] + 1, j) * N[m - j]
            sign = -sign
        return total

    def count(self, s: int, p: int) -> int:
        n = s * self.c - p
        m0 = min(n, (s - 1) * self.c + 1)
        self._extend_core(m0)
        if n == m0:
            return self.N[n]
        a = self.a[:m0] + [s * (self.lg - self.c) + p] * (n - m0)
        N = self.N[:m0 + 1]
        for m in range(m0 + 1, n + 1):
            N.append(self._next(a, N, m))
        return N[n]


@lru_cache(maxsize=None)
def _counter(lg: int, c: int) -> _GroupCounter:
    return _GroupCounter(lg, c)


@lru_cache(maxsize=4096)
def group_np_count(lg: int, c: int, s: int, p: int) -> int:
    """Admissible pattern count with sc - p erasures over s intervals of lg slots.

    Evaluated as the dominated-sequence count of
    :func:`group_dominating_sequence`.
    """
    if not 1 <= c < lg:
        raise ValueError(f"need 1 <= c < lg, got lg={lg}, c={c}")
    if s < 2:
        raise ValueError("pattern counts are defined for s >= 2")
    if not 0 <= p <= c - 1:
        raise ValueError(f"p must lie in [0, c-1], got {p}")
    if s * c - p > s * lg:
        return 0
    return _counter(lg, c).count(s, p)


def group_np_count_det(lg: int, c: int, s: int, p: int) -> int:
    """Same count through the determinant; slower, used as a cross-check."""
    n = s * c - p
    if n > s * lg:
        return 0
    return kreweras_count(group_dominating_sequence(lg, c, s, p), n)
