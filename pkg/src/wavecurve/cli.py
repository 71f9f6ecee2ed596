"""Command-line entry point for the benchmark runners.

Exit codes: 0 success, 1 configuration error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .bench import ValidationReport, run_experiment
from .config import load_config
from .errors import ConfigError

EXPERIMENTS = ("table1", "fig2", "fig3", "validate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavecurve",
        description="Near-field anisotropic-wavefront channel benchmarks",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=0, help="master seed (u64)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument(
            "--paper-scale",
            action="store_true",
            help="run at full published scale instead of the desk-scale default",
        )
        p.add_argument("--trials", type=int, default=None, help="override trial count")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if not (0 <= args.seed < 2**64):
            raise ConfigError("--seed must fit in an unsigned 64-bit integer")
        if args.paper_scale:
            cfg.fig3 = cfg.fig3.paper_scale()
            cfg.fig2 = dataclasses.replace(cfg.fig2, step=min(cfg.fig2.step, 0.02))
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigError("--trials must be >= 1")
            cfg.fig3 = dataclasses.replace(cfg.fig3, n_trials=args.trials)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    result = run_experiment(args.experiment, cfg, args.seed, args.out)
    if isinstance(result, ValidationReport):
        for line in result.lines():
            print(line)
        if not result.passed:
            print("validation FAILED", file=sys.stderr)
            return 2
        print("validation passed")
    else:
        print(f"wrote {result}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
