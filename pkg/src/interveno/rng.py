"""Deterministic counter-based random streams.

Every stochastic fit in the engine draws from a SplitMix64 stream addressed
by (seed, stream index), so results are reproducible bit-for-bit regardless
of evaluation order: stream k of seed s always yields the same sequence.

SplitMix64 reference: Steele, Lea & Flood, "Fast splittable pseudorandom
number generators" (the java.util.SplittableRandom mixer).
"""
from __future__ import annotations

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


class Stream:
    """One independent SplitMix64 sequence for (seed, stream index)."""

    def __init__(self, seed: int, stream: int = 0):
        self._state = _mix64((seed & MASK64) ^ _mix64(stream & MASK64))

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return _mix64(self._state)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randint(self, n: int) -> int:
        """Integer in [0, n) via Lemire multiply-shift."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        return (self.next_u64() * n) >> 64

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), by partial Fisher-Yates."""
        if not 0 < k <= n:
            raise ValueError("need 0 < k <= n")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randint(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]

    def shuffled(self, n: int) -> list[int]:
        return self.sample_without_replacement(n, n)

    def normal(self) -> float:
        """Standard normal via Box-Muller (one deviate per call pair)."""
        import math

        u1 = self.uniform()
        u2 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
