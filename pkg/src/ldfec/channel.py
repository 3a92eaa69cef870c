"""Seeded packet-erasure channels.

All randomness comes from numpy's PCG64 generator.  A channel draws an
erasure mask for a run of slots; :func:`apply` pairs a mask with a packet
sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def make_rng(seed, *stream) -> np.random.Generator:
    """PCG64 generator for ``seed`` with optional sub-stream keys."""
    if isinstance(seed, np.random.Generator):
        return seed
    entropy = [int(seed)] + [int(s) for s in stream] if seed is not None else None
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class IidChannel:
    """Independent erasures with probability ``epsilon`` per slot."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")

    @property
    def loss_rate(self) -> float:
        return self.epsilon

    def erasure_mask(self, n: int, rng: np.random.Generator, prev_bad: bool | None = None) -> np.ndarray:
        if self.epsilon == 0.0:
            return np.zeros(n, dtype=bool)
        return rng.random(n) < self.epsilon

    def to_dict(self) -> dict:
        return {"model": "iid", "epsilon": self.epsilon}


@dataclass(frozen=True)
class GilbertElliottChannel:
    """Two-state Markov erasures: state G passes everything, state B erases everything.

    Parameterised by the stationary bad-state probability ``pi_B`` and
    the mean bad-burst length ``expected_burst``.  The chain starts from
    its stationary distribution.
    """

    pi_B: float
    expected_burst: float

    def __post_init__(self):
        if not 0.0 <= self.pi_B < 1.0:
            raise ValueError(f"pi_B must lie in [0, 1), got {self.pi_B}")
        if self.expected_burst < 1.0:
            raise ValueError(f"expected burst length must be >= 1, got {self.expected_burst}")
        if self.gamma > 1.0:
            raise ValueError("pi_B and expected_burst give a G->B probability above 1")

    @property
    def beta(self) -> float:
        """P(B -> G)."""
        return 1.0 / self.expected_burst

    @property
    def gamma(self) -> float:
        """P(G -> B)."""
        return self.beta * self.pi_B / (1.0 - self.pi_B)

    @property
    def loss_rate(self) -> float:
        return self.pi_B

    def erasure_mask(self, n: int, rng: np.random.Generator, prev_bad: bool | None = None) -> np.ndarray:
        """Erasure pattern for n slots.

        The first state is stationary, or one transition on from ``prev_bad``
        when continuing an earlier pattern.
        """
        mask = np.zeros(n, dtype=bool)
        if n == 0 or self.pi_B == 0.0:
            return mask
        p_bad = self.pi_B if prev_bad is None else (1 - self.beta if prev_bad else self.gamma)
        # Alternate geometric sojourns; draw in chunks until n slots are covered.
        bad = rng.random() < p_bad
        pos = 0
        chunk = max(16, int(2 * n * self.gamma) + 16)
        while pos < n:
            good_runs = rng.geometric(self.gamma, size=chunk)
            bad_runs = rng.geometric(self.beta, size=chunk)
            for g, b in zip(good_runs, bad_runs):
                if bad:
                    mask[pos:pos + b] = True
                    pos += b
                    bad = False
                    if pos >= n:
                        break
                pos += g
                bad = True
                if pos >= n:
                    break
        return mask

    def to_dict(self) -> dict:
        return {"model": "gilbert-elliott", "pi_B": self.pi_B, "expected_burst": self.expected_burst}


Channel = IidChannel | GilbertElliottChannel


def apply(channel: Channel, packets, seed=None) -> list[tuple[object, bool]]:
    """Pair each packet with an erasure flag; deterministic given ``seed``."""
    packets = list(packets)
    mask = channel.erasure_mask(len(packets), make_rng(seed))
    return list(zip(packets, map(bool, mask)))


def burst_lengths(mask: np.ndarray) -> np.ndarray:
    """Lengths of the maximal runs of erasures in a boolean mask."""
    m = np.concatenate(([False], np.asarray(mask, dtype=bool), [False]))
    edges = np.flatnonzero(m[1:] != m[:-1])
    return edges[1::2] - edges[::2]
