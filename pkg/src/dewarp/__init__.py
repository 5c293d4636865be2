"""dewarp: segment-based mel-spectrogram warping toolkit.

Generates (warped, original) spectrogram pairs for de-warping pre-training,
applies SegAug augmentation during fine-tuning, samples shard-sized corpus
subsets, inverts mels with Griffin-Lim, and scores synthesis with MCD-DTW.
"""

from .audio_io import WORKING_RATE, Waveform, duration_seconds, load_wav, resample, write_wav
from .dataset import (
    ManifestEntry,
    PairEntry,
    PairIndex,
    ShardSpec,
    emit_pretraining_pairs,
    ensure_durations,
    load_manifest,
    load_pair_index,
    read_mel,
    read_record,
    sample_shards,
    save_manifest,
    write_mel,
    write_record,
)
from .evaluate import McdResult, dtw, mcd_between_mels, mcd_dtw, mel_cepstra
from .rng import SplitMix64, derive_seed, fnv1a64, splitmix64
from .spectral import (
    MagnitudeSpectrogram,
    MelSpectrogram,
    SpectralParams,
    griffin_lim,
    mel_filterbank,
    mel_spectrogram,
    mel_to_magnitude,
    spectral_convergence,
    stft_magnitude,
)
from .warp import (
    Segmentation,
    WarpConfig,
    WarpRecord,
    dewarp_oracle,
    random_segmentation,
    resize_linear,
    segaug,
    segmentation_from_file,
    warp,
    warp_utterance,
)

__version__ = "0.1.0"

__all__ = [
    "WORKING_RATE",
    "Waveform",
    "duration_seconds",
    "load_wav",
    "resample",
    "write_wav",
    "ManifestEntry",
    "PairEntry",
    "PairIndex",
    "ShardSpec",
    "emit_pretraining_pairs",
    "ensure_durations",
    "load_manifest",
    "load_pair_index",
    "read_mel",
    "read_record",
    "sample_shards",
    "save_manifest",
    "write_mel",
    "write_record",
    "McdResult",
    "dtw",
    "mcd_between_mels",
    "mcd_dtw",
    "mel_cepstra",
    "SplitMix64",
    "derive_seed",
    "fnv1a64",
    "splitmix64",
    "MagnitudeSpectrogram",
    "MelSpectrogram",
    "SpectralParams",
    "griffin_lim",
    "mel_filterbank",
    "mel_spectrogram",
    "mel_to_magnitude",
    "spectral_convergence",
    "stft_magnitude",
    "Segmentation",
    "WarpConfig",
    "WarpRecord",
    "dewarp_oracle",
    "random_segmentation",
    "resize_linear",
    "segaug",
    "segmentation_from_file",
    "warp",
    "warp_utterance",
]
