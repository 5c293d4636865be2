"""WAV reading/writing, resampling, and duration accounting.

Supports the plain RIFF/WAVE container with PCM-16 or IEEE float-32 samples,
which covers every corpus this toolkit targets. Audio is always handed around
as mono float64 in [-1, 1]; the working rate downstream is 16 kHz but nothing
here assumes it.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedWav, UnsupportedEncoding

WORKING_RATE = 16000

_PCM = 1
_IEEE_FLOAT = 3


@dataclass(frozen=True)
class Waveform:
    """Mono audio: samples in [-1, 1] plus their sample rate in Hz."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return len(self.samples)


def load_wav(path: str | Path) -> Waveform:
    """Read a RIFF/WAVE file into a mono waveform.

    Multichannel audio is averaged to mono; PCM-16 samples are scaled by
    1/32768; float-32 samples are clipped to [-1, 1].

    Raises:
        MalformedWav: damaged header, missing chunks, truncated or empty data,
            non-finite float samples.
        UnsupportedEncoding: any sample format other than PCM-16 or float-32.
    """
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset : offset + 4]
        (chunk_size,) = struct.unpack_from("<I", data, offset + 4)
        body_start = offset + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body_start + 16 > len(data):
                raise MalformedWav(f"{path}: fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            if body_start + chunk_size > len(data):
                raise MalformedWav(f"{path}: data chunk truncated")
            payload = data[body_start : body_start + chunk_size]
        offset = body_start + chunk_size + (chunk_size & 1)

    if fmt is None or payload is None:
        raise MalformedWav(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, _, bits = fmt
    if n_channels < 1 or sample_rate <= 0:
        raise MalformedWav(f"{path}: nonsensical fmt fields")

    if audio_format == _PCM and bits == 16:
        frame_bytes = 2 * n_channels
        payload = payload[: len(payload) - len(payload) % frame_bytes]
        raw = np.frombuffer(payload, dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _IEEE_FLOAT and bits == 32:
        frame_bytes = 4 * n_channels
        payload = payload[: len(payload) - len(payload) % frame_bytes]
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedEncoding(
            f"{path}: format={audio_format} bits={bits}; only PCM-16 and float-32 are supported"
        )

    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    if samples.size == 0:
        raise MalformedWav(f"{path}: no samples")
    if not np.all(np.isfinite(samples)):
        raise MalformedWav(f"{path}: non-finite samples")

    return Waveform(np.clip(samples, -1.0, 1.0), int(sample_rate))


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write a mono PCM-16 RIFF/WAVE file (round-half-up quantization)."""
    x = np.clip(np.asarray(w.samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.clip(np.floor(x * 32768.0 + 0.5), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(body)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, _PCM, 1, w.sample_rate, w.sample_rate * 2, 2, 16
    )
    header += b"data" + struct.pack("<I", len(body))
    tmp = Path(path).with_name(Path(path).name + ".tmp")
    tmp.write_bytes(header + body)
    tmp.replace(path)


def resample(w: Waveform, target_rate: int) -> Waveform:
    """Linear-interpolation resample to ``target_rate``.

    Output length is round(len * target/source), half away from zero. When the
    rates already match the samples are returned unchanged.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == w.sample_rate:
        return Waveform(w.samples.copy(), target_rate)
    n_in = len(w.samples)
    n_out = (2 * n_in * target_rate + w.sample_rate) // (2 * w.sample_rate)
    positions = np.arange(n_out) * (w.sample_rate / target_rate)
    out = np.interp(positions, np.arange(n_in), w.samples)
    return Waveform(out, target_rate)


def duration_seconds(w: Waveform) -> float:
    """Length of the waveform in seconds."""
    return len(w.samples) / w.sample_rate
