"""Readers/writers for the data toolkit's file interfaces.

MELS tensor: b"MELS" magic, u32 version=1, u32 N, u32 M, N*M float32
(little-endian, frame-major). Manifests and pair indexes are JSON-lines.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MELS_MAGIC = b"MELS"


class DataFormatError(Exception):
    """MELS/manifest content is not what the header or schema promises."""


class MissingTranscript(Exception):
    """Fine-tuning needs transcripts but a manifest entry has none."""


def read_mels(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != MELS_MAGIC:
        raise DataFormatError(f"{path}: bad magic {data[:4]!r}")
    version, n, m = struct.unpack_from("<III", data, 4)
    if version != 1:
        raise DataFormatError(f"{path}: unsupported MELS version {version}")
    if len(data) < 16 + 4 * n * m:
        raise DataFormatError(f"{path}: truncated payload")
    values = np.frombuffer(data, dtype="<f4", count=n * m, offset=16)
    return values.reshape(n, m).copy()


def write_mels(path: str | Path, values: np.ndarray) -> None:
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2:
        raise DataFormatError(f"mel tensor must be 2-D, got shape {values.shape}")
    n, m = values.shape
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(MELS_MAGIC + struct.pack("<III", 1, n, m) + values.tobytes())
    tmp.replace(path)


@dataclass(frozen=True)
class PairRecord:
    utterance_id: str
    epoch: int
    warped_path: Path
    original_path: Path


def read_pair_index(path: str | Path) -> list[PairRecord]:
    path = Path(path)
    base = path.parent
    pairs = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            continue
        obj = json.loads(raw)
        pairs.append(
            PairRecord(
                obj["id"], int(obj["epoch"]),
                base / obj["warped_path"], base / obj["original_path"],
            )
        )
    if not pairs:
        raise DataFormatError(f"{path}: empty pair index")
    return pairs


@dataclass(frozen=True)
class Utterance:
    utterance_id: str
    text: str | None
    mel_path: Path | None


def read_manifest(path: str | Path) -> list[Utterance]:
    path = Path(path)
    base = path.parent
    out = []
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise DataFormatError(f"{path}:{lineno}: invalid JSON ({e.msg})") from None
        mel = obj.get("mel")
        out.append(
            Utterance(
                utterance_id=obj["id"],
                text=obj.get("text"),
                mel_path=(base / mel) if mel else None,
            )
        )
    if not out:
        raise DataFormatError(f"{path}: empty manifest")
    return out
