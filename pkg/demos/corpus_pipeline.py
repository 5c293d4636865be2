"""End-to-end corpus pipeline on a throwaway synthetic corpus:

manifest -> mel extraction -> shard sampling -> pre-training pairs -> MCD report

Everything runs through the same subcommands the `dewarp` executable exposes.
Run: python demos/corpus_pipeline.py
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from dewarp import Waveform, write_wav
from dewarp.cli import main as dewarp_cli

root = Path(tempfile.mkdtemp(prefix="dewarp-demo-"))
corpus = root / "corpus"
corpus.mkdir()
print(f"working in {root}")

# build 10 tone utterances of varying pitch and length
lines = []
for i in range(10):
    uid = f"utt{i:02d}"
    n = 8000 + 900 * i
    t = np.arange(n) / 16000.0
    wav = Waveform(0.4 * np.sin(2 * np.pi * (220 + 45 * i) * t), 16000)
    write_wav(corpus / f"{uid}.wav", wav)
    lines.append(json.dumps({"id": uid, "audio": str(corpus / f"{uid}.wav")}))
manifest = corpus / "manifest.jsonl"
manifest.write_text("\n".join(lines) + "\n")

print("\n== mel extraction ==")
dewarp_cli(["mel", "--manifest", str(manifest), "--out", str(root / "mels")])

print("\n== shard sampling (tiny target so the demo corpus suffices) ==")
dewarp_cli([
    "shards", "--manifest", str(manifest), "--shards", "0.004",
    "--out", str(root / "subset.jsonl"), "--seed", "1",
])

print("\n== de-warping pre-training pairs, 2 epochs ==")
dewarp_cli([
    "warp", "--manifest", str(manifest), "--mode", "unit", "--epochs", "2",
    "--out", str(root / "pairs"), "--seed", "1",
])

print("\n== SegAug augmented targets ==")
dewarp_cli([
    "warp", "--manifest", str(manifest), "--mode", "segaug", "--epochs", "1",
    "--out", str(root / "segaug"), "--seed", "1",
])

print("\n== MCD-DTW of the corpus against itself (sanity: exactly 0) ==")
dewarp_cli([
    "eval-mcd", "--ref-dir", str(root / "mels"), "--syn-dir", str(root / "mels"),
    "--out", str(root / "report.json"),
])

print(f"\nartifacts left in {root} for inspection")
