"""Walk through the three warping modes on a synthetic spectrogram.

Run: python demos/warping.py
"""

import numpy as np

from dewarp import (
    MelSpectrogram,
    Segmentation,
    SplitMix64,
    WarpConfig,
    dewarp_oracle,
    random_segmentation,
    segaug,
    warp,
)

N_FRAMES = 60

rng = np.random.default_rng(0)
values = rng.uniform(-11.5, 2.0, (N_FRAMES, 80)).astype(np.float32)
mel = MelSpectrogram(values)
print(f"synthetic mel: {mel.n_frames} frames x {mel.n_bins} bins")

# 1. random segmentation: k = floor(N/6) segments, every segment >= 1 frame
stream = SplitMix64(42)
seg = random_segmentation(N_FRAMES, stream, avg_segment_frames=6)
print(f"\nrandom segmentation: k={seg.k}, boundaries={seg.boundaries}")
print(f"segment lengths {seg.lengths} (sum {sum(seg.lengths)})")

# 2. unit resize: every segment collapses to one frame -> k-frame input for
#    de-warping pre-training
warped, record = warp(mel, seg, WarpConfig(mode="unit_resize"), stream)
print(f"\nunit resize: {record.original_len} -> {record.warped_len} frames")

# the oracle inverse stretches each unit frame back to its known length;
# on real data this is lossy, which is exactly what the pretext task exploits
restored = dewarp_oracle(warped, seg.lengths)
err = np.abs(restored.values - values).max()
print(f"de-warp oracle reconstruction max-abs error: {err:.3f} (lossy, as expected)")

# 3. SegAug: per-segment random factors in [1/3, 5/3]; reproducible per
#    (global seed, utterance id, step)
for step in range(3):
    out = segaug(mel, global_seed=7, utterance_id="demo-utt", step=step)
    print(f"segaug step {step}: {N_FRAMES} -> {out.n_frames} frames")

# 4. naive baseline: one fixed 1/6 factor for the whole spectrogram gives a
#    linear time map instead of a segment-wise non-linear one
naive_cfg = WarpConfig(mode="fixed_factor", strategy="whole")
naive, naive_record = warp(mel, Segmentation(N_FRAMES), naive_cfg, SplitMix64(0))
print(f"\nnaive whole-spectrogram downsample: {N_FRAMES} -> {naive_record.warped_len} frames")
