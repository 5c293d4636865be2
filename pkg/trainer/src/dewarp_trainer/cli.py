"""Trainer subcommands: pretrain, finetune, synth.

All three consume/produce the data toolkit's file formats (pair indexes,
manifests with mel paths, MELS tensors, checkpoints are torch files).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .files import DataFormatError, MissingTranscript
from .model import ToyModelConfig
from .training import finetune, pretrain, synthesize


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mel-bins", type=int, default=80)
    p.add_argument("--embed-dim", type=int, default=64)
    p.add_argument("--encoder-hidden", type=int, default=64)
    p.add_argument("--decoder-hidden", type=int, default=192)
    p.add_argument("--frames-per-step", type=int, default=2)
    p.add_argument("--max-decoder-steps", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)


def _config_from(args) -> ToyModelConfig:
    return ToyModelConfig(
        mel_bins=args.mel_bins,
        embed_dim=args.embed_dim,
        encoder_hidden=args.encoder_hidden,
        decoder_hidden=args.decoder_hidden,
        frames_per_step=args.frames_per_step,
        max_decoder_steps=args.max_decoder_steps,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dewarp-trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="de-warp pre-training from a pair index")
    p.add_argument("--pairs", required=True, help="pair index (pairs.jsonl)")
    p.add_argument("--steps", type=int, default=1400)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", required=True, help="checkpoint output path")
    _add_model_flags(p)
    p.set_defaults(func=_cmd_pretrain)

    p = sub.add_parser("finetune", help="text-to-mel fine-tuning")
    p.add_argument("--manifest", required=True, help="manifest with text and mel fields")
    p.add_argument("--checkpoint", default=None, help="pre-trained checkpoint (optional)")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--segaug", action="store_true", help="warp targets during training")
    p.add_argument("--cooldown-steps", type=int, default=0)
    p.add_argument("--global-seed", type=int, default=0, help="SegAug warping seed")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    _add_model_flags(p)
    p.set_defaults(func=_cmd_finetune)

    p = sub.add_parser("synth", help="decode text to a MELS tensor")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-steps", type=int, default=None)
    p.set_defaults(func=_cmd_synth)

    return parser


def _cmd_pretrain(args) -> int:
    out = pretrain(
        args.pairs, _config_from(args), steps=args.steps, out_path=args.out,
        batch_size=args.batch_size, lr=args.lr,
    )
    print(f"checkpoint written to {out}")
    return 0


def _cmd_finetune(args) -> int:
    out = finetune(
        args.checkpoint, args.manifest, _config_from(args), steps=args.steps,
        out_path=args.out, use_segaug=args.segaug, cooldown_steps=args.cooldown_steps,
        global_seed=args.global_seed, batch_size=args.batch_size, lr=args.lr,
    )
    print(f"checkpoint written to {out}")
    return 0


def _cmd_synth(args) -> int:
    meta = synthesize(args.checkpoint, args.text, args.out, max_steps=args.max_steps)
    print(f"{meta['frames']} frames -> {args.out}"
          + (" (hit decoder cap)" if meta["non_convergent"] else ""))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (DataFormatError, MissingTranscript, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
