"""Release gate: every criterion below must pass at the stated tolerance.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` or on
failure) so the suite doubles as a checklist.
"""

import hashlib
import json
import math
import time

import numpy as np

from dewarp import (
    MelSpectrogram,
    Segmentation,
    SplitMix64,
    SpectralParams,
    WarpConfig,
    dewarp_oracle,
    dtw,
    mcd_dtw,
    random_segmentation,
    resize_linear,
    spectral_convergence,
    stft_magnitude,
    warp,
)
from dewarp.cli import main as cli_main
from dewarp.evaluate import MCD_CONST
from tests.conftest import make_tone
from tests.test_eval import brute_force_dtw

P = SpectralParams()


def report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def iter_cases(count=1000):
    for trial in range(count):
        rng = SplitMix64(trial)
        n = 12 + rng.below(2000 - 12 + 1)
        yield trial, n, rng


def test_warp_partition_law():
    start = time.time()
    for trial, n, rng in iter_cases():
        seg = random_segmentation(n, rng, 6)
        assert sum(seg.lengths) == n
        assert min(seg.lengths) >= 1
        assert seg.k == n // 6
    elapsed = time.time() - start
    report("warp partition law (1000 cases)", elapsed < 5.0, f"{elapsed:.2f}s")


def test_unit_resize_length_law():
    cfg = WarpConfig(mode="unit_resize")
    for trial, n, rng in iter_cases():
        seg = random_segmentation(n, rng, 6)
        m = MelSpectrogram(np.zeros((n, 8), dtype=np.float32))
        warped, record = warp(m, seg, cfg, rng)
        assert warped.n_frames == seg.k
        assert record.warped_len == seg.k

    values = np.random.default_rng(0).uniform(-11.5, 2.0, (40, 80)).astype(np.float32)
    m = MelSpectrogram(values)
    identity_cfg = WarpConfig(mode="factor_resize", factor_min=1.0, factor_max=1.0)
    warped, _ = warp(m, Segmentation(40), identity_cfg, SplitMix64(0))
    bit_exact = np.array_equal(warped.values, values)
    report("unit-resize length law + bit-exact identity warp", bit_exact)


def test_dewarp_oracle_round_trip():
    worst = 0.0
    for trial in range(100):
        stream = SplitMix64(trial + 5000)
        n = 12 + stream.below(500)
        seg = random_segmentation(n, stream, 6)
        rng = np.random.default_rng(trial)
        values = np.empty((n, 16), dtype=np.float32)
        for start, end in seg.bounds():
            values[start:end] = rng.uniform(-11.5, 2.0, 16).astype(np.float32)
        warped, _ = warp(
            MelSpectrogram(values), seg, WarpConfig(mode="unit_resize"), stream
        )
        back = dewarp_oracle(warped, seg.lengths)
        worst = max(worst, float(np.abs(back.values - values).max()))
    report("de-warp oracle on piecewise-constant inputs", worst < 1e-6, f"max abs {worst:.2e}")


def test_interpolation_goldens():
    ramp = np.array([[0.0], [2.0], [4.0], [6.0], [8.0]])
    ok = np.array_equal(resize_linear(ramp, 3), [[0.0], [4.0], [8.0]])
    ok &= np.array_equal(resize_linear(np.array([[2.0], [4.0], [6.0]]), 1), [[4.0]])
    x = np.random.default_rng(1).standard_normal((6, 3))
    ok &= np.array_equal(resize_linear(x, 6), x)
    report("interpolation goldens", bool(ok))


def test_dtw_matches_exhaustive_enumeration():
    start = time.time()
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n, m = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        cost = rng.uniform(0.0, 1.0, (n, m))
        total, _ = dtw(cost)
        assert total == brute_force_dtw(cost)
    elapsed = time.time() - start
    report("dtw equals brute force (200 matrices)", elapsed < 10.0, f"{elapsed:.2f}s")


def test_mcd_identity_and_closed_form():
    rng = np.random.default_rng(31)
    x = rng.standard_normal((25, 13))
    identity_ok = mcd_dtw(x, x).mcd_db == 0.0

    v = rng.standard_normal(13)
    got = mcd_dtw(np.zeros((1, 13)), v[None, :]).mcd_db
    expected = MCD_CONST * math.sqrt(2.0 * float(v @ v))
    closed_ok = abs(got - expected) / expected < 1e-9
    report(
        "mcd identity + single-frame closed form",
        identity_ok and closed_ok,
        f"rel err {abs(got - expected) / expected:.2e}",
    )


def test_griffin_lim_convergence():
    mag = stft_magnitude(make_tone(freq=440.0, seconds=0.2), P)
    errors = []
    from dewarp import griffin_lim

    griffin_lim(
        mag, P, iterations=60,
        callback=lambda i, s: errors.append(spectral_convergence(mag, s, P)),
    )
    monotone = all(b <= a + 1e-7 for a, b in zip(errors, errors[1:]))
    report(
        "griffin-lim 440 Hz convergence",
        monotone and errors[-1] < 0.05,
        f"final {errors[-1]:.4f}, monotone={monotone}",
    )


def _tone_manifest(tmp_path, count=8):
    from dewarp import Waveform, write_wav

    corpus = tmp_path / "corpus"
    corpus.mkdir()
    lines = []
    for i in range(count):
        uid = f"utt{i}"
        path = corpus / f"{uid}.wav"
        t = np.arange(8000 + 800 * i) / 16000.0
        write_wav(path, Waveform(0.4 * np.sin(2 * np.pi * (250 + 60 * i) * t), 16000))
        lines.append(json.dumps({"id": uid, "audio": str(path)}))
    manifest = corpus / "manifest.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    return manifest


def _digest_dir(path):
    blob = hashlib.sha256()
    for p in sorted(path.iterdir()):
        blob.update(p.name.encode())
        blob.update(p.read_bytes())
    return blob.hexdigest()


def test_cli_determinism(tmp_path):
    manifest = _tone_manifest(tmp_path)
    warp_digests = []
    shard_digests = []
    for run in ("r1", "r2"):
        out = tmp_path / f"warp-{run}"
        code = cli_main([
            "warp", "--manifest", str(manifest), "--mode", "unit",
            "--epochs", "2", "--out", str(out), "--seed", "11", "--jobs", "2",
        ])
        assert code == 0
        warp_digests.append(_digest_dir(out))

        shard_out = tmp_path / f"shards-{run}.jsonl"
        code = cli_main([
            "shards", "--manifest", str(manifest), "--shards", "0.002",
            "--out", str(shard_out), "--seed", "11",
        ])
        assert code == 0
        shard_digests.append(hashlib.sha256(shard_out.read_bytes()).hexdigest())
    ok = warp_digests[0] == warp_digests[1] and shard_digests[0] == shard_digests[1]
    report("CLI warp/shards determinism (hash equality)", ok)


def test_shard_accounting():
    from dewarp import ManifestEntry, ShardSpec, sample_shards

    spec = ShardSpec(shards=0.5, shard_minutes=24.0, seed=5)
    target_ok = spec.target_seconds == 720.0

    rng = np.random.default_rng(8)
    overshoot_ok = True
    for trial in range(50):
        manifest = [
            ManifestEntry(f"u{i}", f"u{i}.wav", duration=float(d))
            for i, d in enumerate(rng.uniform(3.0, 15.0, 300))
        ]
        picked = sample_shards(manifest, ShardSpec(shards=0.5, seed=trial))
        total = sum(e.duration for e in picked)
        if not (total >= 720.0 and total - picked[-1].duration < 720.0):
            overshoot_ok = False
    report(
        "shard accounting (720 s target, one-utterance overshoot)",
        target_ok and overshoot_ok,
    )
