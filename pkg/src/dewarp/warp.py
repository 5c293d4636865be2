"""Segment-based time warping of mel spectrograms.

A spectrogram of N frames is partitioned along time into k segments, each
segment is resized by linear interpolation, and the pieces are re-concatenated
in order. Three transformations cover the toolkit's jobs:

* ``unit_resize``   - every segment collapses to a single frame. The (warped,
                      original) pairs drive de-warping pre-training.
* ``factor_resize`` - every segment is rescaled by its own random factor drawn
                      uniformly from [factor_min, factor_max]. This is the
                      SegAug fine-tuning augmentation.
* ``fixed_factor``  - the whole spectrogram is resized by one fixed factor
                      (default 1/6), ignoring the segmentation. This induces a
                      purely linear time map and serves as the naive baseline.

All randomness is drawn from splitmix64 streams seeded per (utterance, step),
so every warp is reproducible from (global_seed, utterance_id, step) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    LengthMismatch,
    MalformedBoundaryLine,
    NonMonotonicBoundaries,
    TooShort,
    UnknownUtterance,
)
from .rng import SplitMix64, derive_seed
from .spectral import MelSpectrogram

STRATEGIES = ("random", "boundary_file", "whole")
MODES = ("unit_resize", "factor_resize", "fixed_factor")


@dataclass(frozen=True)
class Segmentation:
    """Interior boundary indices splitting N frames into k = len+1 segments."""

    n_frames: int
    boundaries: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError(f"n_frames must be >= 1, got {self.n_frames}")
        prev = 0
        for b in self.boundaries:
            if not 0 < b < self.n_frames:
                raise ValueError(f"boundary {b} outside (0, {self.n_frames})")
            if b <= prev:
                raise NonMonotonicBoundaries(f"boundaries not strictly increasing: {self.boundaries}")
            prev = b

    @property
    def k(self) -> int:
        return len(self.boundaries) + 1

    @property
    def knots(self) -> tuple[int, ...]:
        return (0, *self.boundaries, self.n_frames)

    @property
    def lengths(self) -> tuple[int, ...]:
        knots = self.knots
        return tuple(knots[i + 1] - knots[i] for i in range(len(knots) - 1))

    def bounds(self) -> list[tuple[int, int]]:
        knots = self.knots
        return [(knots[i], knots[i + 1]) for i in range(len(knots) - 1)]


@dataclass(frozen=True)
class WarpConfig:
    strategy: str = "random"
    avg_segment_frames: int = 6
    factor_min: float = 1.0 / 3.0
    factor_max: float = 5.0 / 3.0
    mode: str = "unit_resize"
    fixed_factor: float = 1.0 / 6.0
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.avg_segment_frames < 1:
            raise ValueError("avg_segment_frames must be >= 1")
        if not 0 < self.factor_min <= self.factor_max:
            raise ValueError("need 0 < factor_min <= factor_max")
        if self.fixed_factor <= 0:
            raise ValueError("fixed_factor must be positive")


@dataclass(frozen=True)
class WarpRecord:
    """Everything needed to reproduce one warp exactly."""

    utterance_id: str
    seed: int
    boundaries: Segmentation
    original_len: int
    warped_len: int


def random_segmentation(n_frames: int, rng: SplitMix64, avg_segment_frames: int = 6) -> Segmentation:
    """Sample k-1 distinct boundaries from {1..N-1}, k = floor(N / avg).

    Uses a partial Fisher-Yates pass on the candidate indices so every segment
    has at least one frame. Requires N >= 2*avg so that k >= 2.
    """
    if avg_segment_frames < 1:
        raise ValueError("avg_segment_frames must be >= 1")
    if n_frames < 2 * avg_segment_frames:
        raise TooShort(
            f"{n_frames} frames cannot be split with avg segment {avg_segment_frames}"
        )
    k = n_frames // avg_segment_frames
    candidates = list(range(1, n_frames))
    n = len(candidates)
    for i in range(k - 1):
        j = i + rng.below(n - i)
        candidates[i], candidates[j] = candidates[j], candidates[i]
    return Segmentation(n_frames, tuple(sorted(candidates[: k - 1])))


def segmentation_from_file(
    path: str | Path, utterance_id: str, n_frames: int
) -> tuple[Segmentation, int]:
    """Look up externally produced boundaries (e.g. from a phoneme aligner).

    File format: one record per line, ``<utterance_id> TAB <comma-separated
    frame indices>``; the index list may be empty (single segment); lines
    starting with ``#`` are ignored. Boundaries at or beyond N-1 are treated
    as end-of-utterance markers and dropped; the count of dropped indices is
    returned alongside the segmentation.
    """
    table: dict[str, tuple[int, ...]] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if "\t" not in line:
            raise MalformedBoundaryLine(f"{path}:{lineno}: missing TAB separator")
        uid, _, index_field = line.partition("\t")
        tokens = [t for t in index_field.strip().split(",") if t.strip()]
        try:
            indices = tuple(int(t.strip()) for t in tokens)
        except ValueError:
            raise MalformedBoundaryLine(f"{path}:{lineno}: non-integer boundary") from None
        if any(b < 1 for b in indices):
            raise MalformedBoundaryLine(f"{path}:{lineno}: boundary below 1")
        if uid not in table:
            table[uid] = indices

    if utterance_id not in table:
        raise UnknownUtterance(f"{path}: no record for {utterance_id!r}")
    indices = table[utterance_id]
    if any(b2 <= b1 for b1, b2 in zip(indices, indices[1:])):
        raise NonMonotonicBoundaries(f"{utterance_id}: boundaries {indices} not increasing")
    kept = tuple(b for b in indices if b < n_frames - 1)
    return Segmentation(n_frames, kept), len(indices) - len(kept)


def resize_linear(segment: np.ndarray, target_len: int) -> np.ndarray:
    """Align-corners linear resize along axis 0, per column independently.

    Output row j samples input position j*(F-1)/(target_len-1); a target of 1
    samples the midpoint (F-1)/2. Equal lengths return a bit-exact copy.
    Interpolation runs in float64 and is cast back to the input dtype.
    """
    seg = np.asarray(segment)
    n_in = seg.shape[0]
    if n_in < 1 or target_len < 1:
        raise ValueError("resize_linear needs at least one input and output frame")
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


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def warp(
    m: MelSpectrogram,
    seg: Segmentation,
    cfg: WarpConfig,
    rng: SplitMix64,
    utterance_id: str = "",
    seed: int = 0,
) -> tuple[MelSpectrogram, WarpRecord]:
    """Apply the configured per-segment transformation and re-concatenate.

    ``rng`` supplies the per-segment factors in factor_resize mode (consumed
    in segment order); the other modes draw nothing. ``utterance_id`` and
    ``seed`` are carried into the returned record unchanged.
    """
    if seg.n_frames != m.n_frames:
        raise LengthMismatch(
            f"segmentation covers {seg.n_frames} frames, spectrogram has {m.n_frames}"
        )
    if cfg.mode == "fixed_factor":
        target = max(1, _round_half_up(cfg.fixed_factor * m.n_frames))
        out = resize_linear(m.values, target)
    else:
        pieces = []
        for start, end in seg.bounds():
            if cfg.mode == "unit_resize":
                target = 1
            else:
                u = rng.uniform()
                factor = cfg.factor_min + u * (cfg.factor_max - cfg.factor_min)
                target = max(1, _round_half_up(factor * (end - start)))
            pieces.append(resize_linear(m.values[start:end], target))
        out = np.concatenate(pieces, axis=0)
    record = WarpRecord(
        utterance_id=utterance_id,
        seed=seed,
        boundaries=seg,
        original_len=m.n_frames,
        warped_len=out.shape[0],
    )
    return MelSpectrogram(out, params=m.params, sample_rate=m.sample_rate), record


def warp_utterance(
    m: MelSpectrogram,
    cfg: WarpConfig,
    utterance_id: str,
    step: int,
    segmentation: Segmentation | None = None,
) -> tuple[MelSpectrogram, WarpRecord]:
    """Seeded end-to-end warp: derive the seed, segment, transform.

    Pass ``segmentation`` to use externally supplied boundaries (the
    boundary_file strategy); otherwise segments are random, or a single whole
    segment for the ``whole`` strategy / fixed_factor mode.
    """
    seed = derive_seed(cfg.seed, utterance_id, step)
    rng = SplitMix64(seed)
    if segmentation is not None:
        seg = segmentation
    elif cfg.strategy == "whole" or cfg.mode == "fixed_factor":
        seg = Segmentation(m.n_frames)
    else:
        seg = random_segmentation(m.n_frames, rng, cfg.avg_segment_frames)
    return warp(m, seg, cfg, rng, utterance_id=utterance_id, seed=seed)


def segaug(
    m: MelSpectrogram,
    global_seed: int,
    utterance_id: str,
    step: int,
    cfg: WarpConfig | None = None,
) -> MelSpectrogram:
    """Random-segment factor resize used to augment training targets.

    Convenience composition of seed derivation, random segmentation, and a
    factor_resize warp; returns only the augmented spectrogram.
    """
    base = cfg if cfg is not None else WarpConfig()
    cfg = replace(base, mode="factor_resize", strategy="random", seed=global_seed)
    warped, _ = warp_utterance(m, cfg, utterance_id, step)
    return warped


def dewarp_oracle(warped: MelSpectrogram, original_lengths) -> MelSpectrogram:
    """Best linear reconstruction of a unit-resized spectrogram (test aid).

    Stretches each single-frame segment back to its known original length.
    Only meaningful for unit_resize output with the true segment lengths.
    """
    lengths = [int(n) for n in original_lengths]
    if warped.n_frames != len(lengths):
        raise LengthMismatch(
            f"warped has {warped.n_frames} frames but {len(lengths)} lengths given"
        )
    if any(n < 1 for n in lengths):
        raise ValueError("original lengths must all be >= 1")
    pieces = [
        resize_linear(warped.values[i : i + 1], n) for i, n in enumerate(lengths)
    ]
    out = np.concatenate(pieces, axis=0)
    return MelSpectrogram(out, params=warped.params, sample_rate=warped.sample_rate)
