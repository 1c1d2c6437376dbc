"""Experiment engine: wires scenario synthesis, the per-sample filter loop,
and trace/summary output.

All selected algorithms consume the identical regressor: the runner maintains
a single delay-line buffer and hands the same window to every filter at every
sample.  Outputs are deterministic in the configuration (CSV bytes included),
so identical configs hash identically.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .filters import (
    AdaptNlmsState,
    ConvNlmsState,
    EmHyper,
    FilterState,
    adapt_nlms_bootstrap_step,
    adapt_nlms_step,
    conv_nlms_step,
    em_nlms_e_step,
    em_nlms_m_step,
    process_noise_raw,
)
from .metrics import TraceRecord, system_distance_db, write_trace_csv
from .signals import (
    RirSpec,
    SignalStream,
    gen_speechlike,
    gen_white_noise,
    read_rir_csv,
    simulate_microphone,
    synth_rir,
    write_rir_csv,
)
from .wavio import read_wav

__all__ = ["AlgoTrace", "RunResult", "run_experiment"]

_PLOT_POINTS = 2000


@dataclass
class AlgoTrace:
    """Full-resolution per-sample series of one algorithm, plus file outputs."""

    name: str
    e: np.ndarray
    lam: np.ndarray
    alpha: np.ndarray
    delta_h_db: np.ndarray
    c_h: np.ndarray | None = None
    c_v: np.ndarray | None = None
    c_w: np.ndarray | None = None
    c_w_raw: np.ndarray | None = None
    csv_path: Path | None = None
    csv_sha256: str = ""

    @property
    def final_delta_h_db(self) -> float:
        return float(self.delta_h_db[-1])


@dataclass
class RunResult:
    config: ScenarioConfig
    out_dir: Path
    n_samples: int
    h_true: np.ndarray
    excitation: SignalStream
    microphone: SignalStream
    traces: dict[str, AlgoTrace] = field(default_factory=dict)
    summary_path: Path | None = None


class _EmDriver:
    name = "em_nlms"

    def __init__(self, cfg, m: int, n: int):
        self.state = FilterState(np.zeros(m), cfg.c_h0)
        self.hyper = EmHyper(c_v=cfg.c_v0, c_w=cfg.c_w0, eps=cfg.eps)
        self.trace = AlgoTrace(
            self.name,
            e=np.empty(n),
            lam=np.empty(n),
            alpha=np.empty(n),
            delta_h_db=np.empty(n),
            c_h=np.empty(n),
            c_v=np.empty(n),
            c_w=np.empty(n),
            c_w_raw=np.empty(n),
        )

    def step(self, i: int, x: np.ndarray, d: float) -> None:
        before = self.state
        after, out = em_nlms_e_step(before, self.hyper, x, d)
        raw = process_noise_raw(after, before)
        self.hyper = em_nlms_m_step(after, before, x, d, self.hyper)
        self.state = after
        tr = self.trace
        tr.e[i] = out.e
        tr.lam[i] = out.lam
        tr.alpha[i] = out.alpha
        tr.c_h[i] = after.c_h
        tr.c_v[i] = self.hyper.c_v
        tr.c_w[i] = self.hyper.c_w
        tr.c_w_raw[i] = raw

    @property
    def h_hat(self) -> np.ndarray:
        return self.state.h_hat


class _AdaptDriver:
    name = "adapt_nlms"

    def __init__(self, cfg, m: int, n: int):
        self.state = AdaptNlmsState(
            np.zeros(m), cfg.err_power0, cfg.n_t, cfg.eta, cfg.lambda_cap
        )
        self.eps = cfg.eps
        self.trace = AlgoTrace(
            self.name, e=np.empty(n), lam=np.empty(n), alpha=np.empty(n),
            delta_h_db=np.empty(n),
        )

    def step(self, i: int, x: np.ndarray, d: float) -> None:
        # cold start: with all-zero coefficients the stepsize numerator is
        # zero forever, so the very first sample gets one fixed-mu update
        if i == 0:
            self.state, out = adapt_nlms_bootstrap_step(self.state, x, d, self.eps)
        else:
            self.state, out = adapt_nlms_step(self.state, x, d, self.eps)
        tr = self.trace
        tr.e[i] = out.e
        tr.lam[i] = out.lam
        tr.alpha[i] = out.alpha

    @property
    def h_hat(self) -> np.ndarray:
        return self.state.h_hat


class _ConvDriver:
    name = "conv_nlms"

    def __init__(self, cfg, m: int, n: int, gate_thresholds: np.ndarray | None):
        self.state = ConvNlmsState(np.zeros(m), cfg.mu, None)
        self.eps = cfg.eps
        self.gate_thresholds = gate_thresholds
        self.trace = AlgoTrace(
            self.name, e=np.empty(n), lam=np.empty(n), alpha=np.empty(n),
            delta_h_db=np.empty(n),
        )

    def step(self, i: int, x: np.ndarray, d: float) -> None:
        if self.gate_thresholds is not None:
            self.state.gate_threshold = float(self.gate_thresholds[i])
        self.state, out = conv_nlms_step(self.state, x, d, self.eps)
        tr = self.trace
        tr.e[i] = out.e
        tr.lam[i] = out.lam
        tr.alpha[i] = out.alpha

    @property
    def h_hat(self) -> np.ndarray:
        return self.state.h_hat


def _make_excitation(config: ScenarioConfig) -> SignalStream:
    n = config.n_samples
    kind, _, arg = config.excitation.partition(":")
    if kind == "white":
        return gen_white_noise(n, config.seeds.excitation, config.fs)
    if kind == "speechlike":
        return gen_speechlike(n, config.seeds.excitation, config.fs)
    stream = read_wav(arg)
    if stream.fs != config.fs:
        raise ValueError(
            f"wav sampling rate {stream.fs} Hz does not match scenario fs {config.fs} Hz"
        )
    if len(stream) < n:
        raise ValueError(
            f"wav file provides {len(stream)} samples, scenario needs {n}"
        )
    return SignalStream(stream.samples[:n], stream.fs, "wav")


def _make_rir(config: ScenarioConfig) -> np.ndarray:
    if config.rir.file is not None:
        return read_rir_csv(config.rir.file)
    spec = RirSpec(
        m=config.rir.taps,
        t60=config.rir.t60,
        fs=config.fs,
        seed=config.seeds.rir,
        pre_delay=config.rir.pre_delay,
    )
    return synth_rir(spec)


def _gate_thresholds(x: np.ndarray, m: int, fs: float, scale: float) -> np.ndarray:
    """Per-sample gate threshold: scale times the running mean of the
    regressor energy over the trailing second."""
    n = x.size
    cs = np.concatenate(([0.0], np.cumsum(x * x)))
    idx = np.arange(1, n + 1)
    energy = cs[idx] - cs[np.maximum(idx - m, 0)]
    cse = np.concatenate(([0.0], np.cumsum(energy)))
    window = max(int(round(fs)), 1)
    counts = np.minimum(idx, window)
    mean_energy = (cse[idx] - cse[np.maximum(idx - window, 0)]) / counts
    return scale * mean_energy


def _decimated_indices(n: int, k: int) -> np.ndarray:
    return np.arange(0, n, k)


def run_experiment(
    config: ScenarioConfig,
    out_dir=None,
    emit_plot_data: bool = False,
) -> RunResult:
    """Run one scenario end to end and write traces plus ``summary.txt``.

    Writes one trace CSV per selected algorithm, the echo path used
    (``rir.csv``), and a line-oriented summary with final system distances,
    the resolved configuration, and a SHA-256 hash of each CSV.
    """
    out = Path(out_dir) if out_dir is not None else Path(config.output)
    out.mkdir(parents=True, exist_ok=True)

    h_true = _make_rir(config)
    m = h_true.size
    excitation = _make_excitation(config)
    mic, _clean = simulate_microphone(
        excitation, h_true, config.snr_db, config.seeds.noise
    )
    n = config.n_samples
    xs = excitation.samples
    ds = mic.samples

    drivers = []
    if config.em is not None:
        drivers.append(_EmDriver(config.em, m, n))
    if config.adapt is not None:
        drivers.append(_AdaptDriver(config.adapt, m, n))
    if config.conv is not None:
        thresholds = None
        if config.conv.gate:
            thresholds = _gate_thresholds(xs, m, config.fs, config.conv.gate_scale)
        drivers.append(_ConvDriver(config.conv, m, n, thresholds))

    buf = np.zeros(m)
    for i in range(n):
        buf[1:] = buf[:-1]
        buf[0] = xs[i]
        d_i = float(ds[i])
        for drv in drivers:
            drv.step(i, buf, d_i)
            drv.trace.delta_h_db[i] = system_distance_db(drv.h_hat, h_true)

    result = RunResult(
        config=config,
        out_dir=out,
        n_samples=n,
        h_true=h_true,
        excitation=excitation,
        microphone=mic,
    )

    write_rir_csv(h_true, out / "rir.csv")
    picks = _decimated_indices(n, config.decimation)
    for drv in drivers:
        tr = drv.trace
        records = []
        for i in picks:
            em_cols = {}
            if tr.c_h is not None:
                em_cols = dict(
                    c_h=tr.c_h[i], c_v=tr.c_v[i], c_w=tr.c_w[i], c_w_raw=tr.c_w_raw[i]
                )
            records.append(
                TraceRecord(
                    n=int(i),
                    t=i / config.fs,
                    algo=tr.name,
                    e=tr.e[i],
                    lam=tr.lam[i],
                    alpha=tr.alpha[i],
                    delta_h_db=tr.delta_h_db[i],
                    d=ds[i],
                    **em_cols,
                )
            )
        tr.csv_path = out / f"{tr.name}.csv"
        write_trace_csv(records, tr.csv_path)
        tr.csv_sha256 = hashlib.sha256(tr.csv_path.read_bytes()).hexdigest()
        result.traces[tr.name] = tr

        if emit_plot_data:
            stride = max(1, n // _PLOT_POINTS)
            t = np.arange(0, n, stride) / config.fs
            for series, suffix in ((tr.delta_h_db, "delta_h"), (tr.alpha, "alpha")):
                with open(out / f"plot_{tr.name}_{suffix}.csv", "w") as fh:
                    fh.write(f"t,{suffix}\n")
                    for ti, vi in zip(t, series[::stride]):
                        fh.write(f"{ti:.17g},{vi:.17g}\n")

    summary = [f"samples={n}"]
    for name in config.algorithms:
        tr = result.traces[name]
        summary.append(f"algo.{name}.final_delta_h_db={tr.final_delta_h_db!r}")
        summary.append(f"algo.{name}.csv={tr.csv_path.name}")
        summary.append(f"algo.{name}.csv_sha256={tr.csv_sha256}")
    summary.extend(config.echo_lines())
    result.summary_path = out / "summary.txt"
    result.summary_path.write_text("".join(line + "\n" for line in summary))
    return result
