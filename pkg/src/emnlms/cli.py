"""Command-line experiment runner.

``emnlms run <config> [--emit-plot-data] [--out DIR] [--seed-override k=v]``

Exit codes: 0 on success, 2 for configuration problems, 3 for runtime
failures (degenerate scenarios, I/O errors).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, parse_config
from .runner import run_experiment

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emnlms",
        description="Adaptive-filter echo cancellation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config", help="scenario configuration file")
    run.add_argument(
        "--out", default=None, metavar="DIR", help="output directory (overrides config)"
    )
    run.add_argument(
        "--emit-plot-data",
        action="store_true",
        help="also write downsampled (t, delta_h) and (t, alpha) series",
    )
    run.add_argument(
        "--seed-override",
        action="append",
        default=[],
        metavar="k=v",
        help="override a seed, e.g. --seed-override noise=7 (repeatable)",
    )
    return parser


def _apply_seed_overrides(config, overrides: list[str]) -> None:
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"seed override must look like k=v, got {item!r}")
        if key not in ("rir", "excitation", "noise"):
            raise ConfigError(
                f"unknown seed {key!r}; expected rir, excitation or noise"
            )
        try:
            setattr(config.seeds, key, int(value))
        except ValueError:
            raise ConfigError(f"seed override {key} = {value!r} is not an integer") from None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        _apply_seed_overrides(config, args.seed_override)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_experiment(
            config, out_dir=args.out, emit_plot_data=args.emit_plot_data
        )
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for name in config.algorithms:
        tr = result.traces[name]
        print(f"{name}: final delta_h = {tr.final_delta_h_db:.2f} dB ({tr.csv_path})")
    print(f"summary: {result.summary_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
