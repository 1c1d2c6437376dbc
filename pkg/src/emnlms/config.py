"""Scenario configuration: flat key=value sections, strictly validated.

The format is INI-style (``configparser``) with a fixed set of sections.
``[scenario]`` describes the run, ``[rir]`` the echo path, ``[seeds]`` the
random streams, and the presence of ``[em_nlms]`` / ``[adapt_nlms]`` /
``[conv_nlms]`` selects the algorithms (an empty section selects with all
defaults).  Unknown sections or keys are hard errors; :func:`parse_config`
returns a fully resolved configuration with every default and every ``auto``
value materialized.

Documented schema (defaults in parentheses):

    [scenario]  excitation = white | speechlike | wav:PATH   (required)
                duration_s                                    (required)
                fs                                            (required)
                snr_db = number or inf                        (required)
                output = directory                (runs/<config stem>)
                decimation = int >= 1                         (16)
    [rir]       taps (512), t60 (0.1), pre_delay = auto|int (auto),
                file = CSV path (optional, replaces the synthetic path)
    [seeds]     rir (1), excitation (2), noise (3)
    [em_nlms]   c_h0 (0.1), c_w0 (0.1), c_v0 (0.1), eps (0.01)
    [adapt_nlms] n_t (5), eta (0.9), err_power0 (0.1), eps (0.01),
                lambda_cap = auto|none|number (auto)
    [conv_nlms] mu (0.5), eps (0.01), gate = auto|on|off (auto),
                gate_scale (0.001)

``auto`` resolution: ``pre_delay`` becomes ``n_t`` when adapt_nlms is
selected (the artificial delay its stepsize relies on) and 0 otherwise;
``lambda_cap`` becomes 0.5 and ``gate`` on for speech-type excitation
(speechlike or wav), and off for white noise.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

from .signals import read_rir_csv

__all__ = [
    "ConfigError",
    "Seeds",
    "RirConfig",
    "EmNlmsConfig",
    "AdaptNlmsConfig",
    "ConvNlmsConfig",
    "ScenarioConfig",
    "parse_config",
]

_SECTIONS = ("scenario", "rir", "seeds", "em_nlms", "adapt_nlms", "conv_nlms")
_SPEECH_EXCITATIONS = ("speechlike", "wav")


class ConfigError(ValueError):
    """Anything wrong with a scenario configuration file."""


@dataclass
class Seeds:
    rir: int
    excitation: int
    noise: int


@dataclass
class RirConfig:
    taps: int
    t60: float
    pre_delay: int
    file: str | None = None


@dataclass
class EmNlmsConfig:
    c_h0: float = 0.1
    c_w0: float = 0.1
    c_v0: float = 0.1
    eps: float = 0.01


@dataclass
class AdaptNlmsConfig:
    n_t: int = 5
    eta: float = 0.9
    err_power0: float = 0.1
    eps: float = 0.01
    lambda_cap: float | None = None


@dataclass
class ConvNlmsConfig:
    mu: float = 0.5
    eps: float = 0.01
    gate: bool = False
    gate_scale: float = 1e-3


@dataclass
class ScenarioConfig:
    excitation: str  # "white", "speechlike", or "wav:<path>"
    duration_s: float
    fs: float
    snr_db: float
    output: str
    decimation: int
    rir: RirConfig
    seeds: Seeds
    em: EmNlmsConfig | None = None
    adapt: AdaptNlmsConfig | None = None
    conv: ConvNlmsConfig | None = None

    @property
    def n_samples(self) -> int:
        return int(round(self.duration_s * self.fs))

    @property
    def algorithms(self) -> list[str]:
        names = []
        if self.em is not None:
            names.append("em_nlms")
        if self.adapt is not None:
            names.append("adapt_nlms")
        if self.conv is not None:
            names.append("conv_nlms")
        return names

    def echo_lines(self) -> list[str]:
        """Resolved configuration as deterministic ``config.*`` lines."""

        def fmt(value) -> str:
            if value is None:
                return "none"
            if isinstance(value, bool):
                return "on" if value else "off"
            if isinstance(value, float):
                return repr(value)
            return str(value)

        lines = [
            f"config.scenario.excitation={self.excitation}",
            f"config.scenario.duration_s={fmt(self.duration_s)}",
            f"config.scenario.fs={fmt(self.fs)}",
            f"config.scenario.snr_db={fmt(self.snr_db)}",
            f"config.scenario.output={self.output}",
            f"config.scenario.decimation={self.decimation}",
            f"config.rir.taps={self.rir.taps}",
            f"config.rir.t60={fmt(self.rir.t60)}",
            f"config.rir.pre_delay={self.rir.pre_delay}",
        ]
        if self.rir.file is not None:
            lines.append(f"config.rir.file={self.rir.file}")
        lines += [
            f"config.seeds.rir={self.seeds.rir}",
            f"config.seeds.excitation={self.seeds.excitation}",
            f"config.seeds.noise={self.seeds.noise}",
        ]
        if self.em is not None:
            lines += [
                f"config.em_nlms.c_h0={fmt(self.em.c_h0)}",
                f"config.em_nlms.c_w0={fmt(self.em.c_w0)}",
                f"config.em_nlms.c_v0={fmt(self.em.c_v0)}",
                f"config.em_nlms.eps={fmt(self.em.eps)}",
            ]
        if self.adapt is not None:
            lines += [
                f"config.adapt_nlms.n_t={self.adapt.n_t}",
                f"config.adapt_nlms.eta={fmt(self.adapt.eta)}",
                f"config.adapt_nlms.err_power0={fmt(self.adapt.err_power0)}",
                f"config.adapt_nlms.eps={fmt(self.adapt.eps)}",
                f"config.adapt_nlms.lambda_cap={fmt(self.adapt.lambda_cap)}",
            ]
        if self.conv is not None:
            lines += [
                f"config.conv_nlms.mu={fmt(self.conv.mu)}",
                f"config.conv_nlms.eps={fmt(self.conv.eps)}",
                f"config.conv_nlms.gate={fmt(self.conv.gate)}",
                f"config.conv_nlms.gate_scale={fmt(self.conv.gate_scale)}",
            ]
        return lines


class _Section:
    """One config section with consumed-key tracking."""

    def __init__(self, name: str, items: dict[str, str]):
        self.name = name
        self.items = dict(items)
        self.seen: set[str] = set()

    def get(self, key: str, default: str | None = None) -> str | None:
        self.seen.add(key)
        return self.items.get(key, default)

    def reject_unknown(self) -> None:
        for key in self.items:
            if key not in self.seen:
                raise ConfigError(f"unknown key '{key}' in section [{self.name}]")


def _convert(section: str, key: str, raw: str, kind, what: str):
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(
            f"[{section}] {key} = {raw!r} is not a valid {what}"
        ) from None
    return value


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(f"invariant violation: {message}")


def _get_float(sec: _Section, key: str, default: float | None = None) -> float:
    raw = sec.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in section [{sec.name}]")
        return default
    value = _convert(sec.name, key, raw, float, "number")
    if math.isnan(value):
        raise ConfigError(f"[{sec.name}] {key} must not be NaN")
    return value


def _get_int(sec: _Section, key: str, default: int | None = None) -> int:
    raw = sec.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in section [{sec.name}]")
        return default
    return _convert(sec.name, key, raw, int, "integer")


def parse_config(path) -> ScenarioConfig:
    """Parse and fully resolve a scenario configuration file."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
    if not parser.has_section("scenario"):
        raise ConfigError("missing required section [scenario]")

    def section(name: str) -> _Section:
        items = dict(parser[name]) if parser.has_section(name) else {}
        return _Section(name, items)

    scen = section("scenario")
    excitation = scen.get("excitation")
    if excitation is None:
        raise ConfigError("missing required key 'excitation' in section [scenario]")
    exc_kind = excitation.split(":", 1)[0]
    if exc_kind not in ("white", "speechlike", "wav"):
        raise ConfigError(
            f"[scenario] excitation must be white, speechlike or wav:PATH, "
            f"got {excitation!r}"
        )
    if exc_kind == "wav" and (":" not in excitation or not excitation.split(":", 1)[1]):
        raise ConfigError("[scenario] wav excitation needs a path: wav:PATH")
    duration_s = _get_float(scen, "duration_s")
    fs = _get_float(scen, "fs")
    snr_db = _get_float(scen, "snr_db")
    output = scen.get("output") or f"runs/{path.stem}"
    decimation = _get_int(scen, "decimation", 16)
    scen.reject_unknown()

    _require(duration_s > 0, f"duration_s must be > 0, got {duration_s}")
    _require(fs > 0, f"fs must be > 0, got {fs}")
    _require(not math.isnan(snr_db), "snr_db must be a number or inf")
    _require(decimation >= 1, f"decimation must be >= 1, got {decimation}")
    exact = duration_s * fs
    n_samples = int(round(exact))
    _require(
        abs(exact - n_samples) <= 1e-6 * max(1.0, abs(exact)),
        f"duration_s * fs must be an integer sample count, got {exact}",
    )

    rir_sec = section("rir")
    rir_file = rir_sec.get("file")
    pre_delay_raw = rir_sec.get("pre_delay", "auto")
    if rir_file is not None:
        for key in ("taps", "t60"):
            if rir_sec.get(key) is not None:
                raise ConfigError(
                    f"[rir] '{key}' cannot be combined with 'file' "
                    "(the file defines the echo path)"
                )
        if rir_sec.get("pre_delay", None) not in (None, "auto"):
            raise ConfigError("[rir] 'pre_delay' cannot be combined with 'file'")
        try:
            taps = read_rir_csv(rir_file).size
        except OSError as exc:
            raise ConfigError(f"cannot read RIR file {rir_file}: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"invalid RIR file {rir_file}: {exc}") from exc
        t60 = 0.0
    else:
        taps = _get_int(rir_sec, "taps", 512)
        t60 = _get_float(rir_sec, "t60", 0.1)
        _require(taps >= 1, f"rir taps must be >= 1, got {taps}")
        _require(t60 > 0, f"rir t60 must be > 0, got {t60}")
    rir_sec.reject_unknown()

    seeds_sec = section("seeds")
    seeds = Seeds(
        rir=_get_int(seeds_sec, "rir", 1),
        excitation=_get_int(seeds_sec, "excitation", 2),
        noise=_get_int(seeds_sec, "noise", 3),
    )
    seeds_sec.reject_unknown()

    em = None
    if parser.has_section("em_nlms"):
        em_sec = section("em_nlms")
        em = EmNlmsConfig(
            c_h0=_get_float(em_sec, "c_h0", 0.1),
            c_w0=_get_float(em_sec, "c_w0", 0.1),
            c_v0=_get_float(em_sec, "c_v0", 0.1),
            eps=_get_float(em_sec, "eps", 0.01),
        )
        em_sec.reject_unknown()
        _require(em.c_h0 >= 0, f"c_h0 must be >= 0, got {em.c_h0}")
        _require(em.c_w0 >= 0, f"c_w0 must be >= 0, got {em.c_w0}")
        _require(em.c_v0 >= 0, f"c_v0 must be >= 0, got {em.c_v0}")
        _require(em.eps > 0, f"em_nlms eps must be > 0, got {em.eps}")

    speechy = exc_kind in _SPEECH_EXCITATIONS

    adapt = None
    if parser.has_section("adapt_nlms"):
        ad_sec = section("adapt_nlms")
        cap_raw = ad_sec.get("lambda_cap", "auto")
        adapt = AdaptNlmsConfig(
            n_t=_get_int(ad_sec, "n_t", 5),
            eta=_get_float(ad_sec, "eta", 0.9),
            err_power0=_get_float(ad_sec, "err_power0", 0.1),
            eps=_get_float(ad_sec, "eps", 0.01),
        )
        ad_sec.reject_unknown()
        if cap_raw == "auto":
            adapt.lambda_cap = 0.5 if speechy else None
        elif cap_raw == "none":
            adapt.lambda_cap = None
        else:
            adapt.lambda_cap = _convert("adapt_nlms", "lambda_cap", cap_raw, float, "number")
            _require(adapt.lambda_cap > 0, f"lambda_cap must be > 0, got {adapt.lambda_cap}")
        _require(adapt.n_t >= 1, f"n_t must be >= 1, got {adapt.n_t}")
        _require(adapt.n_t <= taps, f"n_t must be <= rir taps ({taps}), got {adapt.n_t}")
        _require(0 <= adapt.eta < 1, f"eta must be in [0, 1), got {adapt.eta}")
        _require(adapt.err_power0 >= 0, f"err_power0 must be >= 0, got {adapt.err_power0}")
        _require(adapt.eps > 0, f"adapt_nlms eps must be > 0, got {adapt.eps}")

    conv = None
    if parser.has_section("conv_nlms"):
        cv_sec = section("conv_nlms")
        gate_raw = cv_sec.get("gate", "auto")
        conv = ConvNlmsConfig(
            mu=_get_float(cv_sec, "mu", 0.5),
            eps=_get_float(cv_sec, "eps", 0.01),
            gate_scale=_get_float(cv_sec, "gate_scale", 1e-3),
        )
        cv_sec.reject_unknown()
        if gate_raw == "auto":
            conv.gate = speechy
        elif gate_raw in ("on", "off"):
            conv.gate = gate_raw == "on"
        else:
            raise ConfigError(
                f"[conv_nlms] gate must be auto, on or off, got {gate_raw!r}"
            )
        _require(conv.mu > 0, f"mu must be > 0, got {conv.mu}")
        _require(conv.eps > 0, f"conv_nlms eps must be > 0, got {conv.eps}")
        _require(conv.gate_scale > 0, f"gate_scale must be > 0, got {conv.gate_scale}")

    if em is None and adapt is None and conv is None:
        raise ConfigError(
            "no algorithm selected: add at least one of "
            "[em_nlms], [adapt_nlms], [conv_nlms]"
        )

    if rir_file is not None or pre_delay_raw is None:
        pre_delay = 0
    elif pre_delay_raw == "auto":
        pre_delay = adapt.n_t if adapt is not None else 0
    else:
        pre_delay = _convert("rir", "pre_delay", pre_delay_raw, int, "integer")
    _require(pre_delay >= 0, f"pre_delay must be >= 0, got {pre_delay}")
    _require(
        pre_delay < taps,
        f"pre_delay ({pre_delay}) must leave at least one decaying tap (taps={taps})",
    )
    _require(
        n_samples >= taps,
        f"sample count ({n_samples}) must be >= the filter length ({taps})",
    )

    return ScenarioConfig(
        excitation=excitation,
        duration_s=duration_s,
        fs=fs,
        snr_db=snr_db,
        output=output,
        decimation=decimation,
        rir=RirConfig(taps=taps, t60=t60, pre_delay=pre_delay, file=rir_file),
        seeds=seeds,
        em=em,
        adapt=adapt,
        conv=conv,
    )
