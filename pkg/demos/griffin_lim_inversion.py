"""Invert a log-mel spectrogram back to audio and watch Griffin-Lim converge.

Run: python demos/griffin_lim_inversion.py [out.wav]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from dewarp import (
    SpectralParams,
    Waveform,
    griffin_lim,
    mel_spectrogram,
    mel_to_magnitude,
    spectral_convergence,
    stft_magnitude,
    write_wav,
)

params = SpectralParams()

# a two-tone test signal: 440 Hz + 660 Hz, half a second at 16 kHz
t = np.arange(8000) / 16000.0
signal = 0.35 * np.sin(2 * np.pi * 440 * t) + 0.2 * np.sin(2 * np.pi * 660 * t)
wav = Waveform(signal, 16000)

mel = mel_spectrogram(wav, params)
print(f"mel: {mel.n_frames} frames x {mel.n_bins} bins")

# mel -> linear magnitudes through the filterbank pseudo-inverse
mag = mel_to_magnitude(mel)
reference = stft_magnitude(wav, params)
mel_loss = np.linalg.norm(mag.values - reference.values) / np.linalg.norm(reference.values)
print(f"mel round-trip magnitude error: {mel_loss:.3f} (mel compression is lossy)")

errors = []
recovered = griffin_lim(
    mag, params, iterations=60,
    callback=lambda i, s: errors.append(spectral_convergence(mag, s, params)),
)
print("spectral convergence while iterating (phase starts at zero):")
for i in (0, 1, 5, 10, 20, 40, 60):
    print(f"  iter {i:2d}: {errors[i]:.4f}")

out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.gettempdir()) / "glim_demo.wav"
write_wav(out_path, recovered)
print(f"wrote {len(recovered)} samples to {out_path}")
