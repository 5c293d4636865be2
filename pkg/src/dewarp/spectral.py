"""Log-mel analysis and Griffin-Lim synthesis.

The STFT here is deliberately plain: Hann window, no centering, frames at
t*hop, so the frame count is always 1 + floor((len - win) / hop). That exact
bookkeeping is what the warping and de-warping code relies on.

Mel values are stored as natural-log amplitudes floored at ``log_floor`` and
kept in float32, the same dtype the on-disk tensor format uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .audio_io import WORKING_RATE, Waveform
from .errors import AudioTooShort


@dataclass(frozen=True)
class SpectralParams:
    """Front-end configuration: 50 ms Hann window, 12.5 ms hop at 16 kHz."""

    fft_size: int = 1024
    win_length: int = 800
    hop_length: int = 200
    mel_bins: int = 80
    fmin: float = 0.0
    fmax: float = 8000.0
    log_floor: float = 1e-5

    def __post_init__(self):
        if not (0 < self.hop_length <= self.win_length <= self.fft_size):
            raise ValueError("need 0 < hop_length <= win_length <= fft_size")
        if not (0 <= self.fmin < self.fmax):
            raise ValueError("need 0 <= fmin < fmax")
        if self.mel_bins < 2:
            raise ValueError("need at least 2 mel bins")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")

    def frame_count(self, n_samples: int) -> int:
        if n_samples < self.win_length:
            raise AudioTooShort(
                f"{n_samples} samples < window of {self.win_length}"
            )
        return 1 + (n_samples - self.win_length) // self.hop_length


@dataclass(frozen=True)
class MagnitudeSpectrogram:
    """N frames x (fft_size/2 + 1) nonnegative STFT magnitudes."""

    values: np.ndarray

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


@dataclass
class MelSpectrogram:
    """N frames x mel_bins natural-log mel amplitudes (float32).

    ``params`` may be None for tensors read back from disk, where the format
    does not carry the front-end configuration; toolkit defaults are assumed
    wherever one is then needed.
    """

    values: np.ndarray
    params: SpectralParams | None = None
    sample_rate: int = WORKING_RATE

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError(f"mel values must be nonempty 2-D, got shape {self.values.shape}")

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_bins(self) -> int:
        return self.values.shape[1]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window (sums to a constant under 4x overlap)."""
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / length)


@lru_cache(maxsize=8)
def mel_filterbank(p: SpectralParams, sample_rate: int) -> np.ndarray:
    """Triangular mel filters, peak value 1, shape (mel_bins, fft_size/2 + 1)."""
    if p.fmax > sample_rate / 2:
        raise ValueError(f"fmax {p.fmax} above Nyquist for rate {sample_rate}")
    n_bins = p.fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * sample_rate / p.fft_size
    corners = mel_to_hz(np.linspace(hz_to_mel(p.fmin), hz_to_mel(p.fmax), p.mel_bins + 2))
    fbank = np.zeros((p.mel_bins, n_bins))
    for i in range(p.mel_bins):
        lo, center, hi = corners[i], corners[i + 1], corners[i + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        fbank[i] = np.maximum(0.0, np.minimum(rising, falling))
    return fbank


@lru_cache(maxsize=8)
def _filterbank_pinv(p: SpectralParams, sample_rate: int) -> np.ndarray:
    return np.linalg.pinv(mel_filterbank(p, sample_rate))


def _frames(samples: np.ndarray, p: SpectralParams) -> np.ndarray:
    if len(samples) < p.win_length:
        raise AudioTooShort(f"{len(samples)} samples < window of {p.win_length}")
    windows = np.lib.stride_tricks.sliding_window_view(samples, p.win_length)
    return windows[:: p.hop_length]


def _stft_complex(samples: np.ndarray, p: SpectralParams) -> np.ndarray:
    frames = _frames(np.asarray(samples, dtype=np.float64), p) * hann_window(p.win_length)
    return np.fft.rfft(frames, n=p.fft_size, axis=1)


def stft_magnitude(w: Waveform, p: SpectralParams) -> MagnitudeSpectrogram:
    """Magnitude STFT with frames starting at t*hop (no centering)."""
    return MagnitudeSpectrogram(np.abs(_stft_complex(w.samples, p)))


def mel_spectrogram(w: Waveform, p: SpectralParams) -> MelSpectrogram:
    """Log-mel spectrogram: filterbank on magnitudes, then ln with floor."""
    mag = stft_magnitude(w, p)
    filtered = mag.values @ mel_filterbank(p, w.sample_rate).T
    values = np.log(np.maximum(filtered, p.log_floor)).astype(np.float32)
    return MelSpectrogram(values, params=p, sample_rate=w.sample_rate)


def mel_to_magnitude(m: MelSpectrogram) -> MagnitudeSpectrogram:
    """Approximate linear magnitudes via the filterbank pseudo-inverse."""
    p = m.params if m.params is not None else SpectralParams()
    pinv = _filterbank_pinv(p, m.sample_rate)
    mag = np.exp(m.values.astype(np.float64)) @ pinv.T
    return MagnitudeSpectrogram(np.maximum(mag, 0.0))


def _istft(spec: np.ndarray, p: SpectralParams) -> np.ndarray:
    """Weighted overlap-add inverse with Hann synthesis window.

    Output length is (N-1)*hop + win; samples where the squared-window sum is
    ~0 (the very edges of a periodic Hann) stay zero.
    """
    n_frames = spec.shape[0]
    window = hann_window(p.win_length)
    frames = np.fft.irfft(spec, n=p.fft_size, axis=1)[:, : p.win_length]
    frames = frames * window

    n_out = (n_frames - 1) * p.hop_length + p.win_length
    out = np.zeros(n_out)
    wss = np.zeros(n_out)
    win_sq = window * window
    for t in range(n_frames):
        start = t * p.hop_length
        out[start : start + p.win_length] += frames[t]
        wss[start : start + p.win_length] += win_sq
    nonzero = wss > 1e-11
    out[nonzero] /= wss[nonzero]
    return out


def griffin_lim(
    mag: MagnitudeSpectrogram,
    p: SpectralParams,
    iterations: int = 60,
    sample_rate: int = WORKING_RATE,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> Waveform:
    """Alternating-projection phase recovery from STFT magnitudes.

    Phase starts at zero everywhere, so the whole procedure is deterministic.
    ``callback(i, samples)`` is invoked after the initial reconstruction
    (i = 0) and after each iteration (i = 1..iterations).
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    target = np.asarray(mag.values, dtype=np.float64)
    samples = _istft(target.astype(np.complex128), p)
    if callback is not None:
        callback(0, samples)
    for i in range(iterations):
        spec = _stft_complex(samples, p)
        phase = np.exp(1j * np.angle(spec))
        samples = _istft(target * phase, p)
        if callback is not None:
            callback(i + 1, samples)
    return Waveform(samples, sample_rate)


def spectral_convergence(mag: MagnitudeSpectrogram, samples: np.ndarray, p: SpectralParams) -> float:
    """Relative L2 distance between ``mag`` and the STFT magnitude of ``samples``."""
    target = np.asarray(mag.values, dtype=np.float64)
    got = np.abs(_stft_complex(samples, p))
    return float(np.linalg.norm(got - target) / np.linalg.norm(target))
