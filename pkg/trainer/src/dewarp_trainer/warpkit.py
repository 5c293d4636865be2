"""Live SegAug warping, independent of the dewarp package.

The trainer talks to the data toolkit only through files and its CLI, so the
seeded warp used for on-the-fly augmentation is reimplemented here from the
published contract: splitmix64 streams seeded by
splitmix64(seed ^ fnv1a64(id) ^ step*GOLDEN), partial Fisher-Yates boundary
sampling, and align-corners linear resizing.

Every arithmetic step must stay bit-identical to the toolkit's own warping:
training-time targets and `dewarp warp --mode segaug` tensors are required to
match exactly, which the parity tests enforce.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & MASK64
    return h


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def below(self, n: int) -> int:
        return self.next_u64() % n

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53


def derive_seed(global_seed: int, utterance_id: str, step: int) -> int:
    x = (global_seed ^ fnv1a64(utterance_id) ^ ((step * GOLDEN) & MASK64)) & MASK64
    s = SplitMix64(x)
    return s.next_u64()


def sample_boundaries(n_frames: int, rng: SplitMix64, avg_segment_frames: int = 6) -> list[int]:
    """k-1 distinct boundaries from {1..N-1}, k = floor(N / avg)."""
    if n_frames < 2 * avg_segment_frames:
        raise ValueError(f"{n_frames} frames too short for avg {avg_segment_frames}")
    k = n_frames // avg_segment_frames
    candidates = list(range(1, n_frames))
    n = len(candidates)
    for i in range(k - 1):
        j = i + rng.below(n - i)
        candidates[i], candidates[j] = candidates[j], candidates[i]
    return sorted(candidates[: k - 1])


def resize_linear(segment: np.ndarray, target_len: int) -> np.ndarray:
    seg = np.asarray(segment)
    n_in = seg.shape[0]
    if target_len == n_in:
        return seg.copy()
    if target_len == 1:
        positions = np.array([(n_in - 1) / 2.0])
    else:
        positions = np.arange(target_len) * (n_in - 1) / (target_len - 1)
    lo = np.floor(positions).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = positions - lo
    if seg.ndim > 1:
        frac = frac.reshape((-1,) + (1,) * (seg.ndim - 1))
    out = seg[lo] * (1.0 - frac) + seg[hi] * frac
    return out.astype(seg.dtype, copy=False)


def segaug(
    mel: np.ndarray,
    global_seed: int,
    utterance_id: str,
    step: int,
    avg_segment_frames: int = 6,
    factor_min: float = 1.0 / 3.0,
    factor_max: float = 5.0 / 3.0,
) -> np.ndarray:
    """Warp a (frames x bins) array exactly as `dewarp warp --mode segaug` does."""
    rng = SplitMix64(derive_seed(global_seed, utterance_id, step))
    n_frames = mel.shape[0]
    boundaries = sample_boundaries(n_frames, rng, avg_segment_frames)
    knots = [0, *boundaries, n_frames]
    pieces = []
    for start, end in zip(knots, knots[1:]):
        u = rng.uniform()
        factor = factor_min + u * (factor_max - factor_min)
        target = max(1, int(math.floor(factor * (end - start) + 0.5)))
        pieces.append(resize_linear(mel[start:end], target))
    return np.concatenate(pieces, axis=0)
