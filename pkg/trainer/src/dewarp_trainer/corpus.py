"""Synthetic toy corpus: utterances of concatenated harmonic note segments.

Each character of a synthetic "language" maps to a note with its own pitch,
duration, and a gentle within-note frequency glide, so text-to-audio
alignment exists, is monotone, and is non-linear (durations differ per
character). The glide keeps frames position-dependent; a corpus of perfectly
stationary tones lets an autoregressive decoder ignore its encoder entirely.
Audio is written as 16 kHz WAV through the same PCM-16 convention the data
toolkit reads.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

RATE = 16000
ALPHABET = "abcdefghij"
# per-character pitch (Hz), nominal duration (seconds), and relative glide
PITCHES = {ch: 240.0 * (1.16 ** i) for i, ch in enumerate(ALPHABET)}
DURATIONS = {ch: 0.09 + 0.018 * ((i * 3) % 10) for i, ch in enumerate(ALPHABET)}
GLIDES = {ch: -0.10 + 0.022 * i for i, ch in enumerate(ALPHABET)}


def note(ch: str, jitter: float) -> np.ndarray:
    seconds = DURATIONS[ch] * (1.0 + jitter)
    t = np.arange(int(round(seconds * RATE))) / RATE
    f = PITCHES[ch]
    # linear chirp from f to f*(1+glide) across the note
    phase = 2 * np.pi * f * (t + GLIDES[ch] * t * t / (2 * seconds))
    wave = 0.45 * np.sin(phase) + 0.15 * np.sin(2 * phase)
    # short attack/decay envelope so note boundaries are visible in the mel
    env = np.minimum(1.0, np.minimum(t / 0.012, (t[-1] - t) / 0.012 + 1e-9))
    return wave * env


def render(text: str, rng: np.random.Generator) -> np.ndarray:
    pieces = [note(ch, jitter=float(rng.uniform(-0.15, 0.15))) for ch in text]
    return np.concatenate(pieces)


def write_wav_pcm16(path: Path, samples: np.ndarray) -> None:
    pcm = np.clip(np.floor(samples * 32768.0 + 0.5), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(body)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, RATE, RATE * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(body))
    path.write_bytes(header + body)


def generate_corpus(
    out_dir: str | Path,
    n_utterances: int = 200,
    min_chars: int = 12,
    max_chars: int = 24,
    seed: int = 0,
) -> Path:
    """Write WAVs plus a transcribed manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    lines = []
    for i in range(n_utterances):
        uid = f"toy{i:04d}"
        length = int(rng.integers(min_chars, max_chars + 1))
        text = "".join(rng.choice(list(ALPHABET), size=length))
        samples = render(text, rng)
        wav_path = out_dir / f"{uid}.wav"
        write_wav_pcm16(wav_path, samples)
        lines.append(json.dumps({"id": uid, "audio": str(wav_path), "text": text}))
    manifest = out_dir / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
