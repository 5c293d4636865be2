"""Small attention-based seq2seq model.

Two interchangeable input front-ends feed one encoder/decoder pair:

* pre-training: a 1-D convolutional prelayer maps warped mel frames
  (mel_bins -> embed_dim), default kernel width 1;
* fine-tuning: a learnable character embedding table replaces the prelayer,
  everything else is carried over from the checkpoint.

The decoder is a single LSTM cell with content+location attention and
teacher forcing; it predicts ``frames_per_step`` mel frames plus stop logits
per step.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn
import torch.nn.functional as F


@dataclass
class ToyModelConfig:
    mel_bins: int = 80
    embed_dim: int = 64
    encoder_hidden: int = 64
    decoder_hidden: int = 160
    attention_dim: int = 80
    location_filters: int = 8
    location_kernel: int = 15
    prenet_dim: int = 64
    prelayer_kernel: int = 1
    frames_per_step: int = 4
    max_decoder_steps: int = 200
    dropout: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("mel_bins", "embed_dim", "encoder_hidden", "decoder_hidden",
                     "attention_dim", "prenet_dim", "frames_per_step"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.location_kernel % 2 == 0:
            raise ValueError("location_kernel must be odd")


class MelPrelayer(nn.Module):
    """1-D conv over time mapping mel bins to the encoder embedding size."""

    def __init__(self, cfg: ToyModelConfig):
        super().__init__()
        self.conv = nn.Conv1d(
            cfg.mel_bins, cfg.embed_dim, cfg.prelayer_kernel,
            padding=cfg.prelayer_kernel // 2,
        )

    def forward(self, mels: torch.Tensor) -> torch.Tensor:
        # (B, T, mel) -> (B, T, embed)
        return self.conv(mels.transpose(1, 2)).transpose(1, 2)


class Encoder(nn.Module):
    def __init__(self, cfg: ToyModelConfig):
        super().__init__()
        self.lstm = nn.LSTM(
            cfg.embed_dim, cfg.encoder_hidden, batch_first=True, bidirectional=True
        )
        self.output_dim = 2 * cfg.encoder_hidden

    def forward(self, embedded: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        packed = nn.utils.rnn.pack_padded_sequence(
            embedded, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        out, _ = self.lstm(packed)
        out, _ = nn.utils.rnn.pad_packed_sequence(out, batch_first=True)
        return out


class LocationAttention(nn.Module):
    """Content + location attention over encoder memory."""

    def __init__(self, cfg: ToyModelConfig, memory_dim: int):
        super().__init__()
        self.query = nn.Linear(cfg.decoder_hidden, cfg.attention_dim, bias=False)
        self.memory = nn.Linear(memory_dim, cfg.attention_dim, bias=False)
        self.location_conv = nn.Conv1d(
            2, cfg.location_filters, cfg.location_kernel,
            padding=cfg.location_kernel // 2, bias=False,
        )
        self.location = nn.Linear(cfg.location_filters, cfg.attention_dim, bias=False)
        self.score = nn.Linear(cfg.attention_dim, 1, bias=False)

    def forward(self, query, memory, memory_proj, attn_history, pad_mask):
        # attn_history: (B, 2, T) previous and cumulative attention weights
        location = self.location(self.location_conv(attn_history).transpose(1, 2))
        energies = self.score(
            torch.tanh(self.query(query).unsqueeze(1) + memory_proj + location)
        ).squeeze(-1)
        energies = energies.masked_fill(pad_mask, -1e9)
        weights = F.softmax(energies, dim=1)
        context = torch.bmm(weights.unsqueeze(1), memory).squeeze(1)
        return context, weights


class Decoder(nn.Module):
    def __init__(self, cfg: ToyModelConfig, memory_dim: int):
        super().__init__()
        self.cfg = cfg
        self.prenet = nn.Sequential(
            nn.Linear(cfg.mel_bins, cfg.prenet_dim), nn.ReLU(), nn.Dropout(cfg.dropout),
            nn.Linear(cfg.prenet_dim, cfg.prenet_dim), nn.ReLU(), nn.Dropout(cfg.dropout),
        )
        self.cell = nn.LSTMCell(cfg.prenet_dim + memory_dim, cfg.decoder_hidden)
        self.attention = LocationAttention(cfg, memory_dim)
        out_dim = cfg.decoder_hidden + memory_dim
        self.frame_proj = nn.Linear(out_dim, cfg.mel_bins * cfg.frames_per_step)
        self.stop_proj = nn.Linear(out_dim, cfg.frames_per_step)

    def _init_state(self, memory):
        batch, t_enc, _ = memory.shape
        zeros = memory.new_zeros
        return {
            "h": zeros((batch, self.cfg.decoder_hidden)),
            "c": zeros((batch, self.cfg.decoder_hidden)),
            "context": zeros((batch, memory.shape[2])),
            "attn": zeros((batch, 2, t_enc)),
            "prev_frame": zeros((batch, self.cfg.mel_bins)),
        }

    def _step(self, state, memory, memory_proj, pad_mask):
        x = torch.cat([self.prenet(state["prev_frame"]), state["context"]], dim=1)
        h, c = self.cell(x, (state["h"], state["c"]))
        context, weights = self.attention(h, memory, memory_proj, state["attn"], pad_mask)
        attn = torch.stack([weights, state["attn"][:, 1] + weights], dim=1)
        hidden = torch.cat([h, context], dim=1)
        frames = self.frame_proj(hidden).view(-1, self.cfg.frames_per_step, self.cfg.mel_bins)
        stops = self.stop_proj(hidden)
        state.update(h=h, c=c, context=context, attn=attn)
        return frames, stops, weights

    def teacher_forced(self, memory, pad_mask, targets):
        """Decode with ground-truth feedback.

        targets: (B, N, mel) with N a multiple of frames_per_step.
        Returns frames (B, N, mel), stop logits (B, N), attention
        (B, N/r, T_enc).
        """
        r = self.cfg.frames_per_step
        batch, n_frames, _ = targets.shape
        memory_proj = self.attention.memory(memory)
        state = self._init_state(memory)
        frame_chunks, stop_chunks, attn_rows = [], [], []
        for t in range(n_frames // r):
            frames, stops, weights = self._step(state, memory, memory_proj, pad_mask)
            frame_chunks.append(frames)
            stop_chunks.append(stops)
            attn_rows.append(weights)
            state["prev_frame"] = targets[:, t * r + r - 1]
        return (
            torch.cat(frame_chunks, dim=1),
            torch.cat(stop_chunks, dim=1),
            torch.stack(attn_rows, dim=1),
        )

    def generate(self, memory, pad_mask, max_steps=None):
        """Free-running decode until every stop gate fires or the cap is hit."""
        r = self.cfg.frames_per_step
        max_steps = max_steps or self.cfg.max_decoder_steps
        memory_proj = self.attention.memory(memory)
        state = self._init_state(memory)
        batch = memory.shape[0]
        done = memory.new_zeros(batch, dtype=torch.bool)
        lengths = memory.new_zeros(batch, dtype=torch.long)
        frame_chunks, attn_rows = [], []
        hit_cap = False
        for _ in range(max_steps):
            frames, stops, weights = self._step(state, memory, memory_proj, pad_mask)
            frame_chunks.append(frames)
            attn_rows.append(weights)
            lengths = torch.where(done, lengths, lengths + r)
            done = done | (torch.sigmoid(stops).max(dim=1).values > 0.5)
            if bool(done.all()):
                break
            state["prev_frame"] = frames[:, -1].detach()
        else:
            hit_cap = True
        return (
            torch.cat(frame_chunks, dim=1),
            torch.stack(attn_rows, dim=1),
            lengths,
            hit_cap,
        )


PAD_SYMBOL = "<pad>"


class ToySeq2Seq(nn.Module):
    """Encoder/decoder pair with a swappable input front-end.

    ``vocab`` None means the mel prelayer front-end (pre-training); a list of
    symbols (PAD_SYMBOL first) means a text embedding front-end (fine-tuning).
    """

    def __init__(self, cfg: ToyModelConfig, vocab: list[str] | None = None):
        super().__init__()
        self.cfg = cfg
        self.vocab = vocab
        if vocab is None:
            self.frontend = MelPrelayer(cfg)
        else:
            if not vocab or vocab[0] != PAD_SYMBOL:
                raise ValueError(f"vocab must start with {PAD_SYMBOL!r}")
            self.frontend = nn.Embedding(len(vocab), cfg.embed_dim, padding_idx=0)
        self.encoder = Encoder(cfg)
        self.decoder = Decoder(cfg, self.encoder.output_dim)

    def encode(self, inputs, lengths):
        memory = self.encoder(self.frontend(inputs), lengths)
        t_enc = memory.shape[1]
        pad_mask = torch.arange(t_enc, device=memory.device)[None, :] >= lengths[:, None]
        return memory, pad_mask

    def shared_state_dict(self):
        """Weights carried from pre-training into fine-tuning (no front-end)."""
        return {
            k: v for k, v in self.state_dict().items() if not k.startswith("frontend.")
        }

    def load_shared(self, shared):
        missing, unexpected = self.load_state_dict(shared, strict=False)
        unexpected = [k for k in unexpected if not k.startswith("frontend.")]
        missing = [k for k in missing if not k.startswith("frontend.")]
        if missing or unexpected:
            raise ValueError(f"checkpoint mismatch: missing={missing} unexpected={unexpected}")

    def char_ids(self, text: str, device=None) -> torch.Tensor:
        if self.vocab is None:
            raise ValueError("model has no text vocabulary (pre-training front-end)")
        index = {ch: i for i, ch in enumerate(self.vocab)}
        try:
            ids = [index[ch] for ch in text]
        except KeyError as e:
            raise ValueError(f"character {e} not in training vocabulary") from None
        return torch.tensor(ids, dtype=torch.long, device=device)
