"""Corpus manifests, shard sampling, tensor serialization, pair emission.

File formats owned by this module:

* Manifest: JSON-lines with fields ``id``, ``audio``, ``duration_sec``
  (optional, computed on demand), ``text`` (optional), ``mel`` (optional,
  written by the ``mel`` pipeline). Unknown fields are ignored.
* MELS tensor: little-endian ``b"MELS"`` magic, u32 version (=1), u32 N,
  u32 M, then N*M float32 values, frame-major.
* Warp record sidecar: JSON object with id, seed, boundaries, original_len,
  warped_len.
* Pair index: JSON-lines of {id, epoch, warped_path, original_path,
  record_path}, paths relative to the index file's directory.
"""

from __future__ import annotations

import json
import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .audio_io import WORKING_RATE, duration_seconds, load_wav, resample
from .errors import (
    BadMagic,
    DewarpError,
    DuplicateId,
    EmptyOutput,
    InsufficientData,
    MalformedLine,
    TruncatedTensor,
    VersionUnsupported,
)
from .rng import SplitMix64
from .spectral import MelSpectrogram, SpectralParams, mel_spectrogram
from .warp import Segmentation, WarpConfig, WarpRecord, segmentation_from_file, warp_utterance

log = logging.getLogger("dewarp.dataset")

MELS_MAGIC = b"MELS"
MELS_VERSION = 1


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    audio_path: str
    duration: float | None = None
    transcript: str | None = None
    mel_path: str | None = None


@dataclass(frozen=True)
class ShardSpec:
    """Fine-tuning data quantity: ``shards`` units of ``shard_minutes`` audio."""

    shards: float
    shard_minutes: float = 24.0
    seed: int = 0

    def __post_init__(self):
        if self.shards <= 0 or self.shard_minutes <= 0:
            raise ValueError("shards and shard_minutes must be positive")

    @property
    def target_seconds(self) -> float:
        return self.shards * self.shard_minutes * 60.0


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


def _atomic_write_text(path: Path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    """Parse a JSON-lines manifest, enforcing unique non-empty ids."""
    entries: list[ManifestEntry] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise MalformedLine(f"{path}:{lineno}: invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise MalformedLine(f"{path}:{lineno}: record is not an object")
        uid = obj.get("id")
        audio = obj.get("audio")
        if not isinstance(uid, str) or not uid:
            raise MalformedLine(f"{path}:{lineno}: missing or empty 'id'")
        if not isinstance(audio, str) or not audio:
            raise MalformedLine(f"{path}:{lineno}: missing or empty 'audio'")
        if uid in seen:
            raise DuplicateId(f"{path}:{lineno}: id {uid!r} already used on line {seen[uid]}")
        seen[uid] = lineno
        duration = obj.get("duration_sec")
        if duration is not None:
            if not isinstance(duration, (int, float)) or duration <= 0:
                raise MalformedLine(f"{path}:{lineno}: duration_sec must be positive")
            duration = float(duration)
        text = obj.get("text")
        if text is not None:
            if not isinstance(text, str) or not text.strip():
                raise MalformedLine(f"{path}:{lineno}: 'text' present but empty")
        mel = obj.get("mel")
        entries.append(ManifestEntry(uid, audio, duration, text, mel))
    return entries


def save_manifest(entries: list[ManifestEntry], path: str | Path) -> None:
    lines = []
    for e in entries:
        obj: dict = {"id": e.utterance_id, "audio": e.audio_path}
        if e.duration is not None:
            obj["duration_sec"] = e.duration
        if e.transcript is not None:
            obj["text"] = e.transcript
        if e.mel_path is not None:
            obj["mel"] = e.mel_path
        lines.append(json.dumps(obj, ensure_ascii=False))
    _atomic_write_text(Path(path), "\n".join(lines) + "\n")


def ensure_durations(entries: list[ManifestEntry]) -> list[ManifestEntry]:
    """Fill in missing durations by reading the audio headers."""
    out = []
    for e in entries:
        if e.duration is None:
            e = replace(e, duration=duration_seconds(load_wav(e.audio_path)))
        out.append(e)
    return out


def sample_shards(manifest: list[ManifestEntry], spec: ShardSpec) -> list[ManifestEntry]:
    """Seeded shuffle, then take whole utterances until the target is covered.

    The selected duration overshoots the target by less than the last selected
    entry's duration; utterances are never split.
    """
    if any(e.duration is None for e in manifest):
        raise ValueError("manifest entries need durations; call ensure_durations first")
    target = spec.target_seconds
    total = sum(e.duration for e in manifest)
    if total < target:
        raise InsufficientData(
            f"manifest holds {total:.1f}s but {target:.1f}s requested"
        )
    order = list(manifest)
    SplitMix64(spec.seed).shuffle(order)
    selected: list[ManifestEntry] = []
    cum = 0.0
    for e in order:
        selected.append(e)
        cum += e.duration
        if cum >= target:
            break
    return selected


def write_mel(path: str | Path, m: MelSpectrogram) -> None:
    """Serialize a mel tensor to the MELS format (atomic write)."""
    values = np.ascontiguousarray(m.values, dtype="<f4")
    n, mbins = values.shape
    header = MELS_MAGIC + struct.pack("<III", MELS_VERSION, n, mbins)
    _atomic_write_bytes(Path(path), header + values.tobytes())


def read_mel(path: str | Path) -> MelSpectrogram:
    """Read a MELS tensor. The format carries no front-end parameters, so the
    result has ``params=None`` and the working sample rate."""
    data = Path(path).read_bytes()
    if data[:4] != MELS_MAGIC:
        raise BadMagic(f"{path}: expected {MELS_MAGIC!r} magic")
    if len(data) < 16:
        raise TruncatedTensor(f"{path}: header incomplete")
    version, n, mbins = struct.unpack_from("<III", data, 4)
    if version != MELS_VERSION:
        raise VersionUnsupported(f"{path}: version {version}")
    need = 16 + 4 * n * mbins
    if len(data) < need:
        raise TruncatedTensor(f"{path}: {len(data)} bytes, header promises {need}")
    values = np.frombuffer(data, dtype="<f4", count=n * mbins, offset=16)
    return MelSpectrogram(values.reshape(n, mbins).copy(), params=None, sample_rate=WORKING_RATE)


def write_record(path: str | Path, record: WarpRecord) -> None:
    obj = {
        "id": record.utterance_id,
        "seed": record.seed,
        "boundaries": list(record.boundaries.boundaries),
        "original_len": record.original_len,
        "warped_len": record.warped_len,
    }
    _atomic_write_text(Path(path), json.dumps(obj) + "\n")


def read_record(path: str | Path) -> WarpRecord:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    seg = Segmentation(int(obj["original_len"]), tuple(int(b) for b in obj["boundaries"]))
    return WarpRecord(
        utterance_id=obj["id"],
        seed=int(obj["seed"]),
        boundaries=seg,
        original_len=int(obj["original_len"]),
        warped_len=int(obj["warped_len"]),
    )


@dataclass(frozen=True)
class PairEntry:
    """One (warped, original) pair; paths relative to the index directory."""

    utterance_id: str
    epoch: int
    warped_path: str
    original_path: str
    record_path: str


@dataclass
class PairIndex:
    out_dir: Path
    entries: list[PairEntry]
    skipped_too_short: int = 0
    errors: list[str] | None = None

    @property
    def index_path(self) -> Path:
        return self.out_dir / "pairs.jsonl"


def load_pair_index(path: str | Path) -> PairIndex:
    path = Path(path)
    entries = []
    for raw in path.read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            continue
        obj = json.loads(raw)
        entries.append(
            PairEntry(
                obj["id"], int(obj["epoch"]), obj["warped_path"],
                obj["original_path"], obj["record_path"],
            )
        )
    return PairIndex(out_dir=path.parent, entries=entries)


def _safe_name(utterance_id: str) -> str:
    return "".join(c if (c.isalnum() or c in "-_.") else "_" for c in utterance_id)


def _emit_one(
    entry: ManifestEntry,
    params: SpectralParams,
    cfg: WarpConfig,
    epochs: int,
    out_dir: Path,
    boundary_path: str | Path | None,
) -> tuple[list[PairEntry], int]:
    wav = resample(load_wav(entry.audio_path), WORKING_RATE)
    mel = mel_spectrogram(wav, params)
    if mel.n_frames < 2 * cfg.avg_segment_frames:
        return [], 1
    uid = entry.utterance_id
    stem = _safe_name(uid)
    original_name = f"{stem}.orig.mels"
    write_mel(out_dir / original_name, mel)
    file_seg = None
    if cfg.strategy == "boundary_file":
        if boundary_path is None:
            raise ValueError("boundary_file strategy needs a boundary file path")
        file_seg, dropped = segmentation_from_file(boundary_path, uid, mel.n_frames)
        if dropped:
            log.warning("%s: dropped %d out-of-range boundaries", uid, dropped)
    produced = []
    for epoch in range(epochs):
        warped, record = warp_utterance(mel, cfg, uid, epoch, segmentation=file_seg)
        warped_name = f"{stem}.ep{epoch:03d}.warped.mels"
        record_name = f"{stem}.ep{epoch:03d}.record.json"
        write_mel(out_dir / warped_name, warped)
        write_record(out_dir / record_name, record)
        produced.append(PairEntry(uid, epoch, warped_name, original_name, record_name))
    return produced, 0


def emit_pretraining_pairs(
    manifest: list[ManifestEntry],
    params: SpectralParams,
    cfg: WarpConfig,
    epochs: int,
    out_dir: str | Path,
    boundary_path: str | Path | None = None,
    jobs: int = 1,
) -> PairIndex:
    """Materialize (warped, original) tensor pairs for every manifest entry.

    Each epoch re-warps with a step-indexed seed, so epochs are independent
    draws. Utterances too short to segment are counted and skipped; per-file
    failures are collected rather than aborting the run. The pair index is
    written last, sorted by (id, epoch), once all workers have finished.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries: list[PairEntry] = []
    skipped = 0
    errors: list[str] = []

    def work(entry: ManifestEntry):
        try:
            return _emit_one(entry, params, cfg, epochs, out_dir, boundary_path)
        except (DewarpError, OSError, ValueError) as e:
            errors.append(f"{entry.utterance_id}: {e}")
            return [], 0

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, manifest))
    else:
        results = [work(e) for e in manifest]
    for produced, was_skipped in results:
        entries.extend(produced)
        skipped += was_skipped

    if not entries:
        raise EmptyOutput(f"no pairs produced ({skipped} skipped, {len(errors)} errors)")
    entries.sort(key=lambda e: (e.utterance_id, e.epoch))
    lines = [
        json.dumps(
            {
                "id": e.utterance_id,
                "epoch": e.epoch,
                "warped_path": e.warped_path,
                "original_path": e.original_path,
                "record_path": e.record_path,
            }
        )
        for e in entries
    ]
    index = PairIndex(out_dir=out_dir, entries=entries, skipped_too_short=skipped, errors=errors)
    _atomic_write_text(index.index_path, "\n".join(lines) + "\n")
    return index
