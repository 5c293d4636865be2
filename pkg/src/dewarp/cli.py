"""Command-line pipeline: mel extraction, warping, shard sampling, inversion,
and MCD-DTW evaluation as subcommands of a single executable.

Every subcommand honors ``--seed`` and ``--jobs``; all randomness is derived
from the seed and the data (never from thread scheduling), so re-running with
identical flags reproduces outputs byte for byte. Exit codes: 0 success,
1 usage error (``usage:`` on stderr), 2 data error (``error:`` on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import dataset
from .audio_io import WORKING_RATE, load_wav, resample, write_wav
from .errors import DewarpError, EmptyOutput
from .evaluate import aggregate_report, mcd_between_mels, report_summary_line
from .spectral import SpectralParams, griffin_lim, mel_spectrogram, mel_to_magnitude
from .warp import WarpConfig

log = logging.getLogger("dewarp.cli")

THIRD = 1.0 / 3.0
FIVE_THIRDS = 5.0 / 3.0
SIXTH = 1.0 / 6.0


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}error: {message}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="global seed (default 0)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="worker threads (default: cpu count)")
    p.add_argument("--log-level", default=os.environ.get("DEWARP_LOG", "WARNING"),
                   help="logging level (or set DEWARP_LOG)")


def _add_spectral_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fft", type=int, default=1024)
    p.add_argument("--win", type=int, default=800)
    p.add_argument("--hop", type=int, default=200)
    p.add_argument("--mels", type=int, default=80)
    p.add_argument("--fmin", type=float, default=0.0)
    p.add_argument("--fmax", type=float, default=8000.0)


def build_parser() -> _Parser:
    parser = _Parser(prog="dewarp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mel", help="extract MELS tensors from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    _add_spectral_flags(p)
    _add_common(p)
    p.set_defaults(func=_cmd_mel)

    p = sub.add_parser("warp", help="emit warped/original tensor pairs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", required=True, choices=["unit", "segaug", "naive"])
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--avg-seg", type=int, default=6)
    p.add_argument("--fmin-factor", type=float, default=None,
                   help=f"segaug factor lower bound (default {THIRD:.4f})")
    p.add_argument("--fmax-factor", type=float, default=None,
                   help=f"segaug factor upper bound (default {FIVE_THIRDS:.4f})")
    p.add_argument("--fixed-factor", type=float, default=None,
                   help=f"naive whole-spectrogram factor (default {SIXTH:.4f})")
    p.add_argument("--boundaries", default=None,
                   help="boundary file enabling file-based segmentation")
    _add_common(p)
    p.set_defaults(func=_cmd_warp)

    p = sub.add_parser("shards", help="sample a fine-tuning subset by duration")
    p.add_argument("--manifest", required=True)
    p.add_argument("--shards", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--shard-minutes", type=float, default=24.0)
    _add_common(p)
    p.set_defaults(func=_cmd_shards)

    p = sub.add_parser("glim", help="invert a MELS tensor to audio")
    p.add_argument("--mel", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=int, default=60)
    _add_common(p)
    p.set_defaults(func=_cmd_glim)

    p = sub.add_parser("eval-mcd", help="MCD-DTW report over paired directories")
    p.add_argument("--ref-dir", required=True)
    p.add_argument("--syn-dir", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_eval_mcd)

    return parser


def _params_from(args) -> SpectralParams:
    return SpectralParams(
        fft_size=args.fft, win_length=args.win, hop_length=args.hop,
        mel_bins=args.mels, fmin=args.fmin, fmax=args.fmax,
    )


def _map_jobs(fn, items, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _cmd_mel(args) -> int:
    params = _params_from(args)
    entries = dataset.load_manifest(args.manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def one(entry):
        wav = resample(load_wav(entry.audio_path), WORKING_RATE)
        mel = mel_spectrogram(wav, params)
        name = dataset._safe_name(entry.utterance_id) + ".mels"
        dataset.write_mel(out_dir / name, mel)
        return replace(entry, duration=len(wav) / wav.sample_rate, mel_path=name)

    updated = _map_jobs(one, entries, args.jobs)
    dataset.save_manifest(updated, out_dir / "manifest.jsonl")
    print(json.dumps({"utterances": len(updated), "manifest": "manifest.jsonl"}))
    return 0


def _cmd_warp(args) -> int:
    if args.mode == "unit":
        mode, strategy = "unit_resize", "random"
    elif args.mode == "segaug":
        mode, strategy = "factor_resize", "random"
    else:
        mode, strategy = "fixed_factor", "whole"
    if args.boundaries is not None and args.mode != "naive":
        strategy = "boundary_file"
    cfg = WarpConfig(
        strategy=strategy,
        avg_segment_frames=args.avg_seg,
        factor_min=THIRD if args.fmin_factor is None else args.fmin_factor,
        factor_max=FIVE_THIRDS if args.fmax_factor is None else args.fmax_factor,
        mode=mode,
        fixed_factor=SIXTH if args.fixed_factor is None else args.fixed_factor,
        seed=args.seed,
    )
    index = dataset.emit_pretraining_pairs(
        dataset.load_manifest(args.manifest),
        SpectralParams(),
        cfg,
        epochs=args.epochs,
        out_dir=args.out,
        boundary_path=args.boundaries,
        jobs=args.jobs,
    )
    for message in index.errors or []:
        log.warning("skipped with error: %s", message)
    print(json.dumps({
        "pairs": len(index.entries),
        "skipped_too_short": index.skipped_too_short,
        "errors": len(index.errors or []),
        "index": index.index_path.name,
    }))
    return 0


def _cmd_shards(args) -> int:
    entries = dataset.ensure_durations(dataset.load_manifest(args.manifest))
    spec = dataset.ShardSpec(args.shards, args.shard_minutes, seed=args.seed)
    selected = dataset.sample_shards(entries, spec)
    dataset.save_manifest(selected, args.out)
    print(json.dumps({
        "selected": len(selected),
        "selected_seconds": round(sum(e.duration for e in selected), 3),
        "target_seconds": spec.target_seconds,
    }))
    return 0


def _cmd_glim(args) -> int:
    mel = dataset.read_mel(args.mel)
    mel.params = SpectralParams()
    wav = griffin_lim(mel_to_magnitude(mel), mel.params, iterations=args.iters)
    write_wav(args.out, wav)
    print(json.dumps({"samples": len(wav), "sample_rate": wav.sample_rate}))
    return 0


def _scan_mels_dir(root: Path) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for path in sorted(root.iterdir()):
        if path.suffix == ".mels":
            found[path.stem] = path
        elif path.suffix == ".wav" and path.stem not in found:
            found[path.stem] = path
    return found


def _load_eval_mel(path: Path):
    if path.suffix == ".mels":
        return dataset.read_mel(path)
    return mel_spectrogram(resample(load_wav(path), WORKING_RATE), SpectralParams())


def _cmd_eval_mcd(args) -> int:
    ref = _scan_mels_dir(Path(args.ref_dir))
    syn = _scan_mels_dir(Path(args.syn_dir))
    ids = sorted(set(ref) & set(syn))
    if not ids:
        raise EmptyOutput("no utterance ids shared between ref and syn directories")
    missing = sorted(set(ref) ^ set(syn))
    if missing:
        log.warning("%d utterances present on one side only: %s", len(missing), missing[:5])

    def one(uid):
        result = mcd_between_mels(_load_eval_mel(ref[uid]), _load_eval_mel(syn[uid]))
        return {"id": uid, "mcd_db": result.mcd_db, "path_len": result.path_len}

    report = aggregate_report(_map_jobs(one, ids, args.jobs))
    dataset._atomic_write_text(Path(args.out), json.dumps(report, indent=2) + "\n")
    print(report_summary_line(report))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return 1
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING))
    if args.jobs < 1:
        print(f"{parser.format_usage()}error: --jobs must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (DewarpError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
