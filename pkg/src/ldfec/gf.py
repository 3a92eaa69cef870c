"""Arithmetic over GF(2^m) for packet symbols.

Each field is built from one fixed primitive polynomial per bit-width so
that coefficient streams are reproducible across runs.  Fields with
m <= 8 keep a full multiplication table; wider fields use log/antilog
tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

# Primitive (hence irreducible) reduction polynomials, bit i = coefficient of x^i.
PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

FULL_TABLE_MAX_BITS = 8


def poly_mulmod(a: int, b: int, poly: int, m: int) -> int:
    """Carry-less multiply of a and b reduced modulo poly (shift-and-add)."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> m:
            a ^= poly
    return result


class GF2m:
    """The field GF(2^m) with symbols represented as ints in [0, 2^m)."""

    def __init__(self, m: int):
        if not 1 <= m <= 16:
            raise ValueError(f"field bit-width must be in [1, 16], got {m}")
        self.m = m
        self.Q = 1 << m
        self.poly = PRIMITIVE_POLYS[m]
        self.dtype = np.uint8 if m <= 8 else np.uint16

        order = self.Q - 1
        exp = [0] * (2 * order)
        log = [0] * self.Q
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = poly_mulmod(x, 2, self.poly, m) if m > 1 else x
        for i in range(order, 2 * order):
            exp[i] = exp[i - order]
        self._exp = exp
        self._log = log
        self._inv = [0] + [exp[(order - log[a]) % order] for a in range(1, self.Q)]

        self.exp_table = np.array(exp, dtype=np.int64)
        self.log_table = np.array(log, dtype=np.int64)
        self.inv_table = np.array(self._inv, dtype=self.dtype)
        if m <= FULL_TABLE_MAX_BITS:
            a = np.arange(self.Q)
            la = self.log_table[a]
            tab = self.exp_table[(la[:, None] + la[None, :]) % order] if order else np.ones((self.Q, self.Q), np.int64)
            tab[0, :] = 0
            tab[:, 0] = 0
            self.mul_table = tab.astype(self.dtype)
            self._mul_rows = [list(map(int, row)) for row in self.mul_table]
        else:
            self.mul_table = None
            self._mul_rows = None

    def __repr__(self) -> str:
        return f"GF2m(m={self.m}, poly={self.poly:#x})"

    # -- scalar ops ---------------------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    def mul(self, a: int, b: int) -> int:
        if self._mul_rows is not None:
            return self._mul_rows[a][b]
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            return 0 if n > 0 else 1
        return self._exp[(self._log[a] * n) % (self.Q - 1)]

    # -- vector ops ---------------------------------------------------------

    def scale(self, c: int, v: np.ndarray) -> np.ndarray:
        """Return c * v elementwise."""
        v = np.asarray(v)
        if self.mul_table is not None:
            return self.mul_table[c][v]
        if c == 0:
            return np.zeros_like(v)
        out = self.exp_table[self._log[c] + self.log_table[v]].astype(self.dtype)
        out[v == 0] = 0
        return out

    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise product of two broadcastable symbol arrays."""
        a = np.asarray(a)
        b = np.asarray(b)
        if self.mul_table is not None:
            return self.mul_table[a, b]
        out = self.exp_table[self.log_table[a] + self.log_table[b]].astype(self.dtype)
        return np.where((a == 0) | (b == 0), 0, out).astype(self.dtype)

    def axpy(self, c: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Return y + c*x."""
        return np.bitwise_xor(y, self.scale(c, x))

    def dot(self, coeffs, rows: np.ndarray) -> np.ndarray:
        """Linear combination sum_j coeffs[j] * rows[j] of symbol vectors."""
        rows = np.asarray(rows, dtype=self.dtype)
        coeffs = np.asarray(coeffs, dtype=np.int64)
        if rows.ndim == 1:
            rows = rows[:, None]
        prods = self.mul_arrays(coeffs[:, None], rows)
        return np.bitwise_xor.reduce(prods, axis=0).astype(self.dtype) if len(coeffs) else np.zeros(rows.shape[1], self.dtype)

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        out = np.zeros((A.shape[0], B.shape[1]), dtype=self.dtype)
        for i in range(A.shape[0]):
            out[i] = self.dot(A[i], B)
        return out

    def random(self, rng: np.random.Generator, size) -> np.ndarray:
        return rng.integers(0, self.Q, size=size, dtype=np.int64).astype(self.dtype)


@lru_cache(maxsize=None)
def field(m: int) -> GF2m:
    """Cached field instance for bit-width m."""
    return GF2m(m)


@dataclass
class SolveResult:
    """Outcome of :func:`solve`.

    ``solution`` is None unless the system has full column rank.  ``ops``
    counts scalar field operations on the coefficient entries plus one
    operation per row-update of the right-hand side.
    """

    solution: np.ndarray | None
    rank: int
    pivot_columns: list[int]
    free_columns: list[int]
    ops: int
    inconsistent: bool = False

    @property
    def full_rank(self) -> bool:
        return self.solution is not None


def solve(F: GF2m, system, rhs) -> SolveResult:
    """Solve ``system @ X = rhs`` over F by Gaussian elimination.

    The pivot for each column is the first row (in order) with a nonzero
    entry.  A rank-deficient system is reported, not raised.
    """
    A = [list(map(int, row)) for row in np.asarray(system)]
    B = np.array(rhs, dtype=F.dtype, copy=True)
    if B.ndim == 1:
        B = B[:, None]
    n_rows = len(A)
    n_cols = len(A[0]) if n_rows else 0
    if n_rows < n_cols:
        raise ValueError("system must be square or tall")
    if B.shape[0] != n_rows:
        raise ValueError("rhs row count does not match system")

    ops = 0
    pivots: list[int] = []
    r = 0
    for col in range(n_cols):
        piv = next((i for i in range(r, n_rows) if A[i][col]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        B[[r, piv]] = B[[piv, r]]
        inv = F.inv(A[r][col])
        ops += 1
        row = A[r]
        for j in range(col + 1, n_cols):
            if row[j]:
                row[j] = F.mul(row[j], inv)
                ops += 1
        row[col] = 1
        B[r] = F.scale(inv, B[r])
        ops += 1
        for i in range(n_rows):
            if i == r or not A[i][col]:
                continue
            f = A[i][col]
            target = A[i]
            for j in range(col + 1, n_cols):
                if row[j]:
                    target[j] ^= F.mul(f, row[j])
                    ops += 2
            target[col] = 0
            B[i] = F.axpy(f, B[r], B[i])
            ops += 2
        pivots.append(col)
        r += 1
        if r == n_rows:
            break

    rank = len(pivots)
    free = [c for c in range(n_cols) if c not in pivots]
    inconsistent = bool(np.any(B[rank:]))
    if rank == n_cols and not inconsistent:
        return SolveResult(B[:n_cols].copy(), rank, pivots, free, ops)
    return SolveResult(None, rank, pivots, free, ops, inconsistent)


def rank(F: GF2m, system) -> int:
    A = np.asarray(system)
    if A.shape[0] < A.shape[1]:
        A = A.T
    return solve(F, A, np.zeros((A.shape[0], 1), dtype=F.dtype)).rank


def batch_rank(F: GF2m, mats: np.ndarray) -> np.ndarray:
    """Ranks of a stack of square matrices, shape (batch, k, k).

    Vectorised over the batch; used for Monte Carlo rank statistics.
    """
    M = np.array(mats, dtype=np.int64, copy=True)
    batch, k, _ = M.shape
    ranks = np.zeros(batch, dtype=np.int64)
    idx = np.arange(batch)
    inv = F.inv_table.astype(np.int64)
    mul = F.mul_table.astype(np.int64) if F.mul_table is not None else None
    for col in range(k):
        # rows >= ranks still unreduced; choose the first nonzero one
        rows = np.arange(k)[None, :]
        cand = (M[:, :, col] != 0) & (rows >= ranks[:, None])
        has = cand.any(axis=1)
        piv = np.argmax(cand, axis=1)
        sel = idx[has]
        if sel.size == 0:
            continue
        r = ranks[sel]
        p = piv[sel]
        tmp = M[sel, r].copy()
        M[sel, r] = M[sel, p]
        M[sel, p] = tmp
        prow = M[sel, r]
        scale = inv[prow[:, col]]
        prow = _bmul(F, mul, scale[:, None], prow)
        M[sel, r] = prow
        factors = M[sel, :, col].copy()
        factors[np.arange(sel.size), r] = 0
        upd = _bmul(F, mul, factors[:, :, None], prow[:, None, :])
        M[sel] ^= upd
        ranks[sel] += 1
    return ranks


def _bmul(F: GF2m, mul, a, b):
    if mul is not None:
        return mul[a, b]
    return F.mul_arrays(a, b).astype(np.int64)
