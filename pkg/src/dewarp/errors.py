"""Exception types raised by the toolkit.

Everything derives from :class:`DewarpError` so callers (and the CLI) can
distinguish data problems from programming errors.
"""


class DewarpError(Exception):
    """Base class for all toolkit errors."""


class MalformedWav(DewarpError):
    """WAV container is damaged: bad header, missing chunks, truncated data."""


class UnsupportedEncoding(DewarpError):
    """WAV sample encoding other than PCM-16 or IEEE float-32."""


class AudioTooShort(DewarpError):
    """Waveform shorter than one analysis window."""


class TooShort(DewarpError):
    """Spectrogram has too few frames to be segmented."""


class UnknownUtterance(DewarpError):
    """Boundary file does not contain the requested utterance id."""


class MalformedBoundaryLine(DewarpError):
    """Boundary file line cannot be parsed as frame indices."""


class NonMonotonicBoundaries(DewarpError):
    """Boundary indices are not strictly increasing."""


class LengthMismatch(DewarpError):
    """Warped frame count disagrees with the supplied segment lengths."""


class InsufficientData(DewarpError):
    """Manifest does not hold enough audio to fill the requested shards."""


class DuplicateId(DewarpError):
    """Manifest contains the same utterance id more than once."""


class MalformedLine(DewarpError):
    """Manifest line is not a valid record."""


class BadMagic(DewarpError):
    """Tensor file does not start with the MELS magic bytes."""


class VersionUnsupported(DewarpError):
    """Tensor file declares a format version this reader does not know."""


class TruncatedTensor(DewarpError):
    """Tensor file payload is shorter than its header promises."""


class EmptyOutput(DewarpError):
    """A pipeline run produced no output at all."""


class DimensionMismatch(DewarpError):
    """Cepstra sequences have different coefficient counts."""
