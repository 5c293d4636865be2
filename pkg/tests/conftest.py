import json
import struct

import numpy as np
import pytest

from dewarp import Waveform


def build_wav_bytes(samples, sample_rate=16000, n_channels=1, encoding="pcm16"):
    """Assemble RIFF/WAVE bytes by hand, independent of the package writer.

    ``samples`` is a flat sequence of per-channel values: for pcm16 they are
    raw int16 values, for float32 they are raw floats.
    """
    if encoding == "pcm16":
        body = struct.pack(f"<{len(samples)}h", *samples)
        fmt_code, bits = 1, 16
    elif encoding == "float32":
        body = struct.pack(f"<{len(samples)}f", *samples)
        fmt_code, bits = 3, 32
    else:
        raise ValueError(encoding)
    block_align = n_channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", fmt_code, n_channels, sample_rate,
        sample_rate * block_align, block_align, bits,
    )
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(body)) + body
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def make_tone(freq=440.0, seconds=1.0, rate=16000, amp=0.5):
    t = np.arange(int(round(seconds * rate))) / rate
    return Waveform(amp * np.sin(2 * np.pi * freq * t), rate)


@pytest.fixture
def tone_corpus(tmp_path):
    """Six short tone utterances with a manifest; returns (manifest_path, dir)."""
    from dewarp import write_wav

    corpus = tmp_path / "corpus"
    corpus.mkdir()
    lines = []
    for i in range(6):
        uid = f"utt{i}"
        wav = make_tone(freq=300.0 + 80.0 * i, seconds=0.5 + 0.1 * i)
        path = corpus / f"{uid}.wav"
        write_wav(path, wav)
        lines.append(json.dumps({"id": uid, "audio": str(path), "text": f"tone {i}"}))
    manifest = corpus / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest, corpus
