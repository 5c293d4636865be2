"""Training loops: de-warp pre-training, fine-tuning with optional SegAug,
free-running synthesis, and alignment diagnostics.

Pre-training consumes a pair index produced by `dewarp warp --mode unit`;
fine-tuning consumes a transcribed manifest whose entries carry mel paths
(from `dewarp mel`). SegAug targets are warped live with step-indexed seeds,
bit-identical to what `dewarp warp --mode segaug` would materialize.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

from . import warpkit
from .files import (
    DataFormatError,
    MissingTranscript,
    Utterance,
    read_manifest,
    read_mels,
    read_pair_index,
    write_mels,
)
from .model import PAD_SYMBOL, ToyModelConfig, ToySeq2Seq

log = logging.getLogger("dewarp_trainer")

PAD_LOG_MEL = -11.512925  # ln(1e-5), the toolkit's log floor


@dataclass
class SeqBatch:
    inputs: torch.Tensor        # (B, T_in, mel) float or (B, T_in) long
    input_lengths: torch.Tensor
    targets: torch.Tensor       # (B, N, mel), N multiple of frames_per_step
    target_lengths: torch.Tensor


def _pad_frames(arrays: list[np.ndarray], multiple: int) -> tuple[torch.Tensor, torch.Tensor]:
    lengths = torch.tensor([a.shape[0] for a in arrays], dtype=torch.long)
    n_max = int(max(a.shape[0] for a in arrays))
    n_max += (-n_max) % multiple
    out = torch.full((len(arrays), n_max, arrays[0].shape[1]), PAD_LOG_MEL)
    for i, a in enumerate(arrays):
        out[i, : a.shape[0]] = torch.from_numpy(np.ascontiguousarray(a, dtype=np.float32))
    return out, lengths


def make_mel_batch(warped: list[np.ndarray], originals: list[np.ndarray], r: int) -> SeqBatch:
    inputs, in_lengths = _pad_frames(warped, multiple=1)
    targets, out_lengths = _pad_frames(originals, multiple=r)
    return SeqBatch(inputs, in_lengths, targets, out_lengths)


def make_text_batch(model: ToySeq2Seq, texts: list[str], originals: list[np.ndarray], r: int) -> SeqBatch:
    ids = [model.char_ids(t) for t in texts]
    lengths = torch.tensor([len(t) for t in ids], dtype=torch.long)
    padded = torch.zeros((len(ids), int(lengths.max())), dtype=torch.long)
    for i, seq in enumerate(ids):
        padded[i, : len(seq)] = seq
    targets, out_lengths = _pad_frames(originals, multiple=r)
    return SeqBatch(padded, lengths, targets, out_lengths)


STOP_POS_WEIGHT = 15.0  # stop=1 frames are ~1% of a sequence; rebalance BCE


def sequence_loss(model: ToySeq2Seq, batch: SeqBatch) -> tuple[torch.Tensor, torch.Tensor]:
    """L1 + L2 frame loss plus stop-gate BCE; returns (loss, attention)."""
    memory, pad_mask = model.encode(batch.inputs, batch.input_lengths)
    frames, stops, attention = model.decoder.teacher_forced(memory, pad_mask, batch.targets)
    n_pad = batch.targets.shape[1]
    positions = torch.arange(n_pad)[None, :]
    valid = positions < batch.target_lengths[:, None]
    stop_target = (positions >= (batch.target_lengths[:, None] - model.cfg.frames_per_step)).float()

    diff_mask = valid.unsqueeze(-1)
    denominator = diff_mask.sum() * model.cfg.mel_bins
    l1 = (frames - batch.targets).abs().mul(diff_mask).sum() / denominator
    l2 = (frames - batch.targets).pow(2).mul(diff_mask).sum() / denominator
    stop_bce = F.binary_cross_entropy_with_logits(
        stops[valid], stop_target[valid], pos_weight=stops.new_tensor(STOP_POS_WEIGHT)
    )
    return l1 + l2 + stop_bce, attention


def evaluate_loss(model: ToySeq2Seq, batches: list[SeqBatch]) -> float:
    model.eval()
    with torch.no_grad():
        losses = [float(sequence_loss(model, b)[0]) for b in batches]
    model.train()
    return sum(losses) / len(losses)


def alignment_diagonality(model: ToySeq2Seq, batches: list[SeqBatch]) -> float:
    """Fraction of decoder steps whose attention argmax does not move backward.

    Pooled over every valid decoder step of every utterance, teacher-forced.
    """
    r = model.cfg.frames_per_step
    model.eval()
    forward_steps = 0
    total_steps = 0
    with torch.no_grad():
        for batch in batches:
            memory, pad_mask = model.encode(batch.inputs, batch.input_lengths)
            _, _, attention = model.decoder.teacher_forced(memory, pad_mask, batch.targets)
            argmax = attention.argmax(dim=2)  # (B, steps)
            for b in range(argmax.shape[0]):
                steps = int(batch.target_lengths[b]) // r
                path = argmax[b, :steps]
                forward_steps += int((path[1:] >= path[:-1]).sum())
                total_steps += max(0, steps - 1)
    model.train()
    return forward_steps / max(1, total_steps)


# ---- checkpoints -------------------------------------------------------------

def save_checkpoint(path: str | Path, model: ToySeq2Seq, kind: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "kind": kind,
        "config": asdict(model.cfg),
        "vocab": model.vocab,
        "model": model.state_dict(),
    }
    tmp = path.with_name(path.name + ".tmp")
    torch.save(payload, tmp)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> tuple[ToySeq2Seq, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    cfg = ToyModelConfig(**payload["config"])
    model = ToySeq2Seq(cfg, vocab=payload["vocab"])
    model.load_state_dict(payload["model"])
    return model, payload


# ---- pre-training -------------------------------------------------------------

def load_pairs(index_path: str | Path) -> list[tuple[str, np.ndarray, np.ndarray]]:
    pairs = []
    for rec in read_pair_index(index_path):
        warped = read_mels(rec.warped_path)
        original = read_mels(rec.original_path)
        if warped.shape[1] != original.shape[1]:
            raise DataFormatError(
                f"{rec.utterance_id}: warped/original mel bins disagree"
            )
        pairs.append((rec.utterance_id, warped, original))
    return pairs


def _batches_of(items, batch_size, r, rng: np.random.Generator, shuffle=True):
    order = rng.permutation(len(items)) if shuffle else np.arange(len(items))
    for start in range(0, len(order), batch_size):
        chunk = [items[i] for i in order[start : start + batch_size]]
        yield make_mel_batch([w for _, w, _ in chunk], [o for _, _, o in chunk], r)


def pretrain(
    index_path: str | Path,
    cfg: ToyModelConfig,
    steps: int,
    out_path: str | Path,
    batch_size: int = 16,
    lr: float = 1e-3,
    holdout_fraction: float = 0.1,
    eval_interval: int = 100,
) -> Path:
    """Train warped-mel -> original-mel reconstruction; returns checkpoint path.

    The mel bin count of the data must match the config. A trailing fraction
    of utterance ids is held out for loss/diagonality logging.
    """
    torch.manual_seed(cfg.seed)
    pairs = load_pairs(index_path)
    if pairs[0][1].shape[1] != cfg.mel_bins:
        raise DataFormatError(
            f"pairs have {pairs[0][1].shape[1]} mel bins, config wants {cfg.mel_bins}"
        )
    ids = sorted({uid for uid, _, _ in pairs})
    n_holdout = max(1, int(len(ids) * holdout_fraction))
    holdout_ids = set(ids[-n_holdout:])
    train_items = [p for p in pairs if p[0] not in holdout_ids]
    held_items = [p for p in pairs if p[0] in holdout_ids]

    model = ToySeq2Seq(cfg, vocab=None)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    rng = np.random.default_rng(cfg.seed)
    data_rng = np.random.default_rng(cfg.seed + 1)
    held_batches = list(_batches_of(held_items, batch_size, cfg.frames_per_step, rng, shuffle=False))

    step = 0
    while step < steps:
        for batch in _batches_of(train_items, batch_size, cfg.frames_per_step, data_rng):
            optimizer.zero_grad()
            loss, _ = sequence_loss(model, batch)
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
            step += 1
            if step % eval_interval == 0 or step == steps:
                held = evaluate_loss(model, held_batches)
                diag = alignment_diagonality(model, held_batches)
                log.info(
                    "pretrain step %d: train loss %.4f, held loss %.4f, diagonality %.3f",
                    step, float(loss.detach()), held, diag,
                )
            if step >= steps:
                break

    save_checkpoint(out_path, model, kind="pretrain")
    return Path(out_path)


# ---- fine-tuning ---------------------------------------------------------------

def build_vocab(entries: list[Utterance]) -> list[str]:
    chars = sorted({ch for e in entries if e.text for ch in e.text})
    if not chars:
        raise MissingTranscript("no transcripts in manifest")
    return [PAD_SYMBOL, *chars]


def _require_transcribed(entries: list[Utterance]) -> list[Utterance]:
    for e in entries:
        if not e.text:
            raise MissingTranscript(f"{e.utterance_id}: manifest entry has no text")
        if e.mel_path is None:
            raise DataFormatError(
                f"{e.utterance_id}: manifest entry has no mel path (run `dewarp mel`)"
            )
    return entries


def finetune(
    checkpoint: str | Path | None,
    manifest_path: str | Path,
    cfg: ToyModelConfig,
    steps: int,
    out_path: str | Path,
    use_segaug: bool = False,
    cooldown_steps: int = 0,
    global_seed: int = 0,
    batch_size: int = 16,
    lr: float = 1e-3,
    eval_interval: int = 100,
) -> Path:
    """Swap the prelayer for a text embedding and train text -> mel.

    With ``use_segaug`` the target spectrograms are warped with seeds derived
    from (global_seed, utterance id, training step); the warped sequence also
    drives teacher forcing, since feedback and loss must share one timeline.
    After ``steps`` augmented steps the model trains ``cooldown_steps`` more
    on unwarped targets.
    """
    torch.manual_seed(cfg.seed)
    entries = _require_transcribed(read_manifest(manifest_path))
    vocab = build_vocab(entries)
    model = ToySeq2Seq(cfg, vocab=vocab)
    model.train()
    if checkpoint is not None:
        pretrained, payload = load_checkpoint(checkpoint)
        if asdict(pretrained.cfg) != asdict(cfg):
            raise DataFormatError("checkpoint config does not match fine-tune config")
        model.load_shared(pretrained.shared_state_dict())
        log.info("loaded shared weights from %s (%s)", checkpoint, payload["kind"])

    items = [(e.utterance_id, e.text, read_mels(e.mel_path)) for e in entries]
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    data_rng = np.random.default_rng(cfg.seed + 2)
    r = cfg.frames_per_step

    def run_phase(n_steps: int, augment: bool, step_offset: int) -> int:
        step = step_offset
        target = step_offset + n_steps
        while step < target:
            order = data_rng.permutation(len(items))
            for start in range(0, len(order), batch_size):
                chunk = [items[i] for i in order[start : start + batch_size]]
                texts = [t for _, t, _ in chunk]
                if augment:
                    mels = [
                        warpkit.segaug(mel, global_seed, uid, step)
                        for uid, _, mel in chunk
                    ]
                else:
                    mels = [mel for _, _, mel in chunk]
                batch = make_text_batch(model, texts, mels, r)
                optimizer.zero_grad()
                loss, _ = sequence_loss(model, batch)
                loss.backward()
                torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
                optimizer.step()
                step += 1
                if step % eval_interval == 0 or step == target:
                    log.info("finetune step %d: loss %.4f (augment=%s)", step, float(loss.detach()), augment)
                if step >= target:
                    break
        return step

    done = run_phase(steps, augment=use_segaug, step_offset=0)
    if use_segaug and cooldown_steps > 0:
        run_phase(cooldown_steps, augment=False, step_offset=done)

    save_checkpoint(out_path, model, kind="finetune")
    return Path(out_path)


# ---- synthesis -----------------------------------------------------------------

def synthesize(
    checkpoint: str | Path,
    text: str,
    out_path: str | Path,
    max_steps: int | None = None,
) -> dict:
    """Decode text to a MELS tensor; returns metadata (also written as JSON)."""
    if not text:
        raise ValueError("cannot synthesize empty text")
    model, _ = load_checkpoint(checkpoint)
    if model.vocab is None:
        raise DataFormatError("checkpoint has no vocabulary; fine-tune first")
    model.eval()
    with torch.no_grad():
        ids = model.char_ids(text).unsqueeze(0)
        lengths = torch.tensor([ids.shape[1]])
        memory, pad_mask = model.encode(ids, lengths)
        frames, _, out_lengths, hit_cap = model.decoder.generate(
            memory, pad_mask, max_steps=max_steps
        )
    n = int(out_lengths[0])
    values = frames[0, :n].numpy().astype(np.float32)
    write_mels(out_path, values)
    meta = {"frames": n, "non_convergent": bool(hit_cap), "text_chars": len(text)}
    meta_path = Path(out_path).with_suffix(".json")
    meta_path.write_text(json.dumps(meta) + "\n")
    if hit_cap:
        log.warning("decoding hit the max step cap after %d frames", n)
    return meta
