"""Cross-component acceptance: seed parity with the data toolkit, alignment
emergence from de-warp pre-training, and the directional value of pre-training.

The two training tests share one pre-trained checkpoint (session fixture) and
together take on the order of twenty minutes on a small CPU.
"""

import json
import subprocess
import sys

import numpy as np

from dewarp_trainer import warpkit
from dewarp_trainer.files import read_mels, read_pair_index
from dewarp_trainer.training import (
    _batches_of,
    alignment_diagonality,
    finetune,
    load_checkpoint,
    load_pairs,
    synthesize,
)


def report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_seed_parity_with_cli(toy_root, toy_manifest, tmp_path):
    """Live SegAug must equal `dewarp warp --mode segaug` bit for bit."""
    sub_manifest = tmp_path / "sub.jsonl"
    lines = toy_manifest.read_text().splitlines()[:10]
    sub_manifest.write_text("\n".join(lines) + "\n")
    out = tmp_path / "segaug"
    proc = subprocess.run(
        [sys.executable, "-m", "dewarp", "warp", "--manifest", str(sub_manifest),
         "--mode", "segaug", "--epochs", "5", "--out", str(out), "--seed", "99"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr

    pairs = read_pair_index(out / "pairs.jsonl")
    assert len(pairs) == 50
    exact = 0
    for rec in pairs:
        original = read_mels(rec.original_path)
        cli_tensor = read_mels(rec.warped_path)
        live = warpkit.segaug(original, 99, rec.utterance_id, rec.epoch)
        if live.shape == cli_tensor.shape and np.array_equal(live, cli_tensor):
            exact += 1
    report("seed parity: live SegAug == CLI tensors", exact == 50, f"{exact}/50 bit-exact")


def test_monotonic_alignment_emerges(toy_root, pretrained_checkpoint):
    """Held-out attention argmax paths non-decreasing at >= 90% of steps."""
    ckpt_path, cfg = pretrained_checkpoint
    model, _ = load_checkpoint(ckpt_path)
    pairs = load_pairs(toy_root / "pairs" / "pairs.jsonl")
    ids = sorted({uid for uid, _, _ in pairs})
    holdout = set(ids[-max(1, len(ids) // 10):])
    held = [p for p in pairs if p[0] in holdout]
    rng = np.random.default_rng(0)
    batches = list(_batches_of(held, 16, cfg.frames_per_step, rng, shuffle=False))
    diag = alignment_diagonality(model, batches)
    report("monotonic alignment after pre-training", diag >= 0.90, f"diagonality {diag:.3f}")


def test_pretraining_helps(toy_root, toy_manifest, pretrained_checkpoint, tmp_path):
    """Pre-trained then fine-tuned beats from-scratch at equal steps (MCD)."""
    ckpt_path, cfg = pretrained_checkpoint
    lines = toy_manifest.read_text().splitlines()
    ft_manifest = tmp_path / "ft.jsonl"
    ft_manifest.write_text("\n".join(lines[:24]) + "\n")
    test_manifest = tmp_path / "test.jsonl"
    test_manifest.write_text("\n".join(lines[-10:]) + "\n")

    def dewarp(*argv):
        proc = subprocess.run(
            [sys.executable, "-m", "dewarp", *map(str, argv)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    dewarp("mel", "--manifest", ft_manifest, "--out", tmp_path / "ft_mels", "--jobs", 2)
    dewarp("mel", "--manifest", test_manifest, "--out", tmp_path / "test_mels", "--jobs", 2)

    means = {}
    for tag, start in (("scratch", None), ("pretrained", ckpt_path)):
        finetuned = finetune(
            start, tmp_path / "ft_mels" / "manifest.jsonl", cfg, steps=400,
            out_path=tmp_path / f"{tag}.pt",
        )
        synth_dir = tmp_path / f"synth_{tag}"
        synth_dir.mkdir()
        for line in test_manifest.read_text().splitlines():
            entry = json.loads(line)
            synthesize(finetuned, entry["text"], synth_dir / f"{entry['id']}.mels")
        report_path = tmp_path / f"report_{tag}.json"
        dewarp(
            "eval-mcd", "--ref-dir", tmp_path / "test_mels", "--syn-dir", synth_dir,
            "--out", report_path,
        )
        means[tag] = json.loads(report_path.read_text())["aggregate"]["mean"]

    report(
        "pre-training lowers held-out MCD-DTW",
        means["pretrained"] < means["scratch"],
        f"pretrained {means['pretrained']:.3f} vs scratch {means['scratch']:.3f}",
    )
