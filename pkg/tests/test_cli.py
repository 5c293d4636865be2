import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from dewarp import load_manifest, read_mel
from dewarp.cli import main


def run_cli(*argv):
    return main(list(argv))


def dir_digest(path):
    blob = hashlib.sha256()
    for p in sorted(path.iterdir()):
        blob.update(p.name.encode())
        blob.update(p.read_bytes())
    return blob.hexdigest()


def test_unknown_flag_is_usage_error(capsys):
    assert run_cli("shards", "--bogus") == 1
    err = capsys.readouterr().err
    assert err.startswith("usage:")


def test_unknown_subcommand_is_usage_error(capsys):
    assert run_cli("frobnicate") == 1
    assert capsys.readouterr().err.startswith("usage:")


def test_missing_manifest_is_data_error(tmp_path, capsys):
    assert run_cli(
        "shards", "--manifest", str(tmp_path / "nope.jsonl"),
        "--shards", "0.5", "--out", str(tmp_path / "out.jsonl"),
    ) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_mel_subcommand(tone_corpus, tmp_path, capsys):
    manifest, _ = tone_corpus
    out = tmp_path / "mels"
    assert run_cli("mel", "--manifest", str(manifest), "--out", str(out)) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["utterances"] == 6
    updated = load_manifest(out / "manifest.jsonl")
    assert all(e.mel_path is not None and e.duration is not None for e in updated)
    mel = read_mel(out / updated[0].mel_path)
    assert mel.n_bins == 80


def test_warp_unit_smallest_case(tmp_path, capsys):
    from dewarp import Waveform, write_wav

    # 12 frames: 800 + 11*200 = 3000 samples
    wav_path = tmp_path / "u.wav"
    write_wav(wav_path, Waveform(np.sin(np.arange(3000) * 0.2) * 0.4, 16000))
    manifest = tmp_path / "m.jsonl"
    manifest.write_text(json.dumps({"id": "u", "audio": str(wav_path)}) + "\n")
    out = tmp_path / "pairs"
    assert run_cli(
        "warp", "--manifest", str(manifest), "--mode", "unit",
        "--epochs", "1", "--out", str(out),
    ) == 0
    assert json.loads(capsys.readouterr().out)["pairs"] == 1
    warped = read_mel(out / "u.ep000.warped.mels")
    assert warped.n_frames == 2


def test_warp_determinism_across_runs(tone_corpus, tmp_path):
    manifest, _ = tone_corpus
    digests = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run_cli(
            "warp", "--manifest", str(manifest), "--mode", "segaug",
            "--epochs", "3", "--out", str(out), "--seed", "7", "--jobs", "2",
        ) == 0
        digests.append(dir_digest(out))
    assert digests[0] == digests[1]


def test_warp_naive_mode(tone_corpus, tmp_path):
    manifest, _ = tone_corpus
    out = tmp_path / "naive"
    assert run_cli(
        "warp", "--manifest", str(manifest), "--mode", "naive",
        "--epochs", "1", "--out", str(out),
    ) == 0
    for record_path in sorted(out.glob("*.record.json")):
        record = json.loads(record_path.read_text())
        assert record["boundaries"] == []
        expected = max(1, int(np.floor(record["original_len"] / 6 + 0.5)))
        assert record["warped_len"] == expected


def test_shards_determinism(tone_corpus, tmp_path):
    manifest, _ = tone_corpus
    outs = []
    for name in ("s1.jsonl", "s2.jsonl"):
        out = tmp_path / name
        assert run_cli(
            "shards", "--manifest", str(manifest), "--shards", "0.002",
            "--out", str(out), "--seed", "3",
        ) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_shards_insufficient_data_leaves_no_output(tone_corpus, tmp_path, capsys):
    manifest, _ = tone_corpus
    out = tmp_path / "o.jsonl"
    assert run_cli(
        "shards", "--manifest", str(manifest), "--shards", "5", "--out", str(out),
    ) == 2
    assert capsys.readouterr().err.startswith("error:")
    assert not out.exists()


def test_glim_round_trip(tone_corpus, tmp_path):
    from dewarp import load_wav

    manifest, _ = tone_corpus
    mels_dir = tmp_path / "mels"
    assert run_cli("mel", "--manifest", str(manifest), "--out", str(mels_dir)) == 0
    wav_out = tmp_path / "resynth.wav"
    assert run_cli(
        "glim", "--mel", str(mels_dir / "utt0.mels"), "--out", str(wav_out),
        "--iters", "10",
    ) == 0
    w = load_wav(wav_out)
    assert w.sample_rate == 16000
    assert len(w) > 0


def test_eval_mcd_self_is_zero(tone_corpus, tmp_path, capsys):
    manifest, _ = tone_corpus
    mels_dir = tmp_path / "mels"
    run_cli("mel", "--manifest", str(manifest), "--out", str(mels_dir))
    report_path = tmp_path / "report.json"
    assert run_cli(
        "eval-mcd", "--ref-dir", str(mels_dir), "--syn-dir", str(mels_dir),
        "--out", str(report_path),
    ) == 0
    out = capsys.readouterr().out
    assert "mcd-dtw count=6 mean=0.0000" in out
    report = json.loads(report_path.read_text())
    assert report["aggregate"]["count"] == 6
    assert report["aggregate"]["mean"] == 0.0
    assert all(row["mcd_db"] == 0.0 for row in report["per_utterance"])


def test_eval_mcd_empty_intersection(tmp_path, capsys):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert run_cli(
        "eval-mcd", "--ref-dir", str(a), "--syn-dir", str(b),
        "--out", str(tmp_path / "r.json"),
    ) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "dewarp", "glim", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "--iters" in proc.stdout


@pytest.mark.parametrize("mode", ["unit", "segaug", "naive"])
def test_boundary_strategy_round_trip(tone_corpus, tmp_path, mode):
    manifest, _ = tone_corpus
    if mode == "naive":
        pytest.skip("naive ignores segmentation")
    bounds = tmp_path / "bounds.tsv"
    # constant boundaries valid for every utterance (all are >= 40 frames)
    bounds.write_text("".join(f"utt{i}\t10,20\n" for i in range(6)))
    out = tmp_path / f"pairs-{mode}"
    assert run_cli(
        "warp", "--manifest", str(manifest), "--mode", mode,
        "--epochs", "1", "--out", str(out), "--boundaries", str(bounds),
    ) == 0
    for record_path in sorted(out.glob("*.record.json")):
        assert json.loads(record_path.read_text())["boundaries"] == [10, 20]
