"""Minimal 16-bit PCM mono WAV reading and writing.

Samples map to [-1, 1) by division by 32768.  The reader rejects anything
that is not plain 16-bit PCM mono; the writer clamps out-of-range samples.
Failures are reported distinctly: :class:`WavFormatError` for malformed or
truncated files, :class:`WavEncodingError` for valid-but-unsupported
encodings, and plain ``OSError`` for I/O problems.
"""

from __future__ import annotations

import wave

import numpy as np

from .signals import SignalStream

__all__ = ["WavError", "WavFormatError", "WavEncodingError", "read_wav", "write_wav"]

_FULL_SCALE = 32768.0


class WavError(Exception):
    """Base class for WAV parsing problems."""


class WavFormatError(WavError):
    """The file is not a well-formed RIFF/WAVE container."""


class WavEncodingError(WavError):
    """The file is well-formed but not 16-bit PCM mono."""


def read_wav(path) -> SignalStream:
    """Read a 16-bit PCM mono WAV file into a :class:`SignalStream`."""
    try:
        with wave.open(str(path), "rb") as reader:
            n_channels = reader.getnchannels()
            samp_width = reader.getsampwidth()
            comp_type = reader.getcomptype()
            n_frames = reader.getnframes()
            fs = reader.getframerate()
            payload = reader.readframes(n_frames)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise WavEncodingError(f"{path}: unsupported encoding ({exc})") from exc
        raise WavFormatError(f"{path}: malformed WAV header ({exc})") from exc
    except EOFError as exc:
        raise WavFormatError(f"{path}: malformed WAV header (truncated)") from exc

    if comp_type != "NONE":
        raise WavEncodingError(f"{path}: compressed WAV ({comp_type}) not supported")
    if n_channels != 1:
        raise WavEncodingError(
            f"{path}: expected mono, file has {n_channels} channels"
        )
    if samp_width != 2:
        raise WavEncodingError(
            f"{path}: expected 16-bit samples, file has {8 * samp_width}-bit"
        )
    if len(payload) != 2 * n_frames:
        raise WavFormatError(
            f"{path}: truncated data chunk "
            f"({len(payload)} bytes for {n_frames} declared frames)"
        )
    samples = np.frombuffer(payload, dtype="<i2").astype(float) / _FULL_SCALE
    return SignalStream(samples, float(fs), "wav")


def write_wav(stream: SignalStream, path) -> None:
    """Write a :class:`SignalStream` as 16-bit PCM mono, clamping to range."""
    scaled = np.rint(stream.samples * _FULL_SCALE)
    pcm = np.clip(scaled, -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as writer:
        writer.setnchannels(1)
        writer.setsampwidth(2)
        writer.setframerate(int(round(stream.fs)))
        writer.writeframes(pcm.tobytes())
