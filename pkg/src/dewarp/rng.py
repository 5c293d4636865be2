"""Portable deterministic randomness.

Every randomized operation in the toolkit draws from a splitmix64 stream whose
seed is derived from (global seed, utterance id, step) via :func:`derive_seed`.
The generator is fully specified by integer arithmetic mod 2**64, so any
implementation in any language can reproduce the same draws bit for bit.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(state: int) -> int:
    """One full splitmix64 step (increment + finalizer) for ``state``."""
    z = (state + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def fnv1a64(text: str) -> int:
    """FNV-1a 64-bit hash of the UTF-8 encoding of ``text``."""
    h = _FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & MASK64
    return h


def derive_seed(global_seed: int, utterance_id: str, step: int) -> int:
    """Per-(utterance, step) seed for all randomized warping.

    Mixes the global seed, the utterance id hash, and a step stride through one
    splitmix64 step. Identical inputs give identical seeds on every platform.
    """
    x = (global_seed ^ fnv1a64(utterance_id) ^ ((step * GOLDEN) & MASK64)) & MASK64
    return splitmix64(x)


class SplitMix64:
    """Seeded splitmix64 stream.

    Not thread-safe; create one stream per (utterance, step) instead of
    sharing. That is also what keeps parallel pipelines deterministic.
    """

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def below(self, n: int) -> int:
        """Integer in [0, n). Modulo bias is < n/2**64, irrelevant here."""
        if n <= 0:
            raise ValueError(f"below() needs n >= 1, got {n}")
        return self.next_u64() % n

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        n = len(items)
        for i in range(n - 1):
            j = i + self.below(n - i)
            items[i], items[j] = items[j], items[i]
