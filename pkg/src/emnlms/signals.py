"""Synthetic scenario generation: excitation signals, room impulse response,
and the simulated microphone signal.

The echo path is a seeded exponentially-decaying noise sequence shaped to a
target reverberation time; the microphone signal is the streaming FIR
convolution of the excitation with that path plus white noise scaled to a
global (full-signal) echo-to-noise ratio.  Every generator is a pure function
of its seed and parameters.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "RirSpec",
    "SignalStream",
    "DegenerateScenarioError",
    "synth_rir",
    "gen_white_noise",
    "gen_speechlike",
    "simulate_microphone",
    "read_rir_csv",
    "write_rir_csv",
]

RIR_CSV_HEADER = "tap_value"

# fixed resonances of the speech-like generator (Hz) and their pole radius
_SPEECH_FORMANTS_HZ = (500.0, 1500.0)
_SPEECH_POLE_RADIUS = 0.97
_SYLLABLE_RATE_HZ = 4.0
_PAUSE_FRACTION = 0.3


class DegenerateScenarioError(RuntimeError):
    """The requested scenario cannot be synthesized (e.g. zero echo energy)."""


@dataclass
class RirSpec:
    """Parameters of the synthetic exponentially-decaying impulse response."""

    m: int
    t60: float
    fs: float
    seed: int
    pre_delay: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"tap count must be >= 1, got {self.m}")
        if self.t60 <= 0:
            raise ValueError(f"reverberation time must be > 0, got {self.t60}")
        if self.fs <= 0:
            raise ValueError(f"sampling rate must be > 0, got {self.fs}")
        if not 0 <= self.pre_delay < self.m:
            raise ValueError(
                f"pre-delay must leave at least one decaying tap: "
                f"got pre_delay={self.pre_delay} with m={self.m}"
            )


@dataclass
class SignalStream:
    """A mono sample sequence with its sampling rate and an excitation label."""

    samples: np.ndarray
    fs: float
    label: str = ""

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples contain NaN or Inf")
        if self.fs <= 0:
            raise ValueError(f"sampling rate must be > 0, got {self.fs}")

    def __len__(self) -> int:
        return self.samples.size


def synth_rir(spec: RirSpec) -> np.ndarray:
    """Seeded exponentially-decaying noise RIR, unit Euclidean norm.

    Taps before ``pre_delay`` are exactly zero; from there on, standard-normal
    gains are shaped by ``exp(-k / tau)`` with ``tau`` chosen so the envelope
    falls by 60 dB over ``t60`` seconds.
    """
    rng = np.random.default_rng(spec.seed)
    tau = spec.t60 * spec.fs / math.log(1e3)
    h = np.zeros(spec.m)
    n_active = spec.m - spec.pre_delay
    gains = rng.standard_normal(n_active)
    decay = np.exp(-np.arange(n_active) / tau)
    h[spec.pre_delay :] = gains * decay
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise DegenerateScenarioError("generated RIR has zero norm")
    return h / norm


def gen_white_noise(n_samples: int, seed: int, fs: float = 16000.0) -> SignalStream:
    """I.i.d. standard-normal excitation, deterministic in the seed."""
    if n_samples < 1:
        raise ValueError(f"sample count must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    return SignalStream(rng.standard_normal(n_samples), fs, "white")


def gen_speechlike(n_samples: int, seed: int, fs: float = 16000.0) -> SignalStream:
    """Speech-like excitation with genuine pauses, deterministic in the seed.

    White noise is run through a fixed all-pole resonator (conjugate pole
    pairs at 500 Hz and 1500 Hz, radius 0.97) and then amplitude-modulated by
    an on/off syllable envelope: ~4 syllables per second, 30% of each cycle
    exactly zero, with a random per-syllable level.  Peak-normalized to 1.
    """
    if n_samples < 1:
        raise ValueError(f"sample count must be >= 1, got {n_samples}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n_samples)

    a = np.ones(1)
    for f_hz in _SPEECH_FORMANTS_HZ:
        omega = 2.0 * math.pi * f_hz / fs
        r = _SPEECH_POLE_RADIUS
        a = np.convolve(a, [1.0, -2.0 * r * math.cos(omega), r * r])
    voiced = lfilter([1.0], a, noise)

    period = max(int(round(fs / _SYLLABLE_RATE_HZ)), 2)
    n_on = int(round(period * (1.0 - _PAUSE_FRACTION)))
    envelope = np.zeros(n_samples)
    start = 0
    while start < n_samples:
        stop = min(start + n_on, n_samples)
        envelope[start:stop] = rng.uniform(0.4, 1.0)
        start += period
    out = voiced * envelope
    peak = np.max(np.abs(out))
    if peak == 0.0:
        raise DegenerateScenarioError("speech-like excitation is identically zero")
    return SignalStream(out / peak, fs, "speechlike")


def simulate_microphone(
    x: SignalStream, h, snr_db: float, seed: int
) -> tuple[SignalStream, SignalStream]:
    """Microphone signal: echo-path convolution plus noise at a global SNR.

    Returns ``(d, clean_echo)`` where ``clean_echo[n] = sum_k h[k] x[n-k]``
    (zero initial state) and ``d`` adds white Gaussian noise scaled so that
    ``10 log10(sum(clean_echo^2) / sum(noise^2))`` over the full duration
    equals ``snr_db``.  Pass ``snr_db = inf`` for the noise-free case.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or h.size < 1:
        raise ValueError(f"echo path must be a nonempty 1-D vector, got {h.shape}")
    clean = lfilter(h, [1.0], x.samples)
    if math.isinf(snr_db):
        d = clean.copy()
    else:
        echo_energy = float(clean @ clean)
        if echo_energy == 0.0:
            raise DegenerateScenarioError(
                "clean echo has zero energy; cannot realize a finite SNR"
            )
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(x.samples.size)
        noise_energy = float(noise @ noise)
        scale = math.sqrt(echo_energy * 10.0 ** (-snr_db / 10.0) / noise_energy)
        d = clean + scale * noise
    return (
        SignalStream(d, x.fs, "microphone"),
        SignalStream(clean, x.fs, "clean_echo"),
    )


def write_rir_csv(h, path) -> None:
    """Export an echo path as a one-column CSV (header ``tap_value``)."""
    h = np.asarray(h, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([RIR_CSV_HEADER])
        for tap in h:
            writer.writerow([format(tap, ".17g")])


def read_rir_csv(path) -> np.ndarray:
    """Import an echo path written by :func:`write_rir_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != [RIR_CSV_HEADER]:
            raise ValueError(
                f"expected a single '{RIR_CSV_HEADER}' column, got header {header}"
            )
        taps = []
        for row in reader:
            if len(row) != 1:
                raise ValueError(f"expected one value per row, got {row}")
            taps.append(float(row[0]))
    if not taps:
        raise ValueError("RIR file contains no taps")
    return np.asarray(taps)
