"""Toy seq2seq trainer for the dewarp toolkit's pre-train/fine-tune protocol."""

from .files import DataFormatError, MissingTranscript, read_manifest, read_mels, read_pair_index, write_mels
from .model import ToyModelConfig, ToySeq2Seq
from .training import (
    alignment_diagonality,
    evaluate_loss,
    finetune,
    load_checkpoint,
    pretrain,
    save_checkpoint,
    synthesize,
)

__version__ = "0.1.0"
