"""Command-line entry point: ``plotkit render --spec FILE``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import render
from .spec import PlotkitError, load_spec


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render benchmark CSV artifacts into figures"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render every figure in a spec file")
    p.add_argument("--spec", type=Path, required=True, help="TOML figure spec")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        specs = load_spec(args.spec)
        for spec in specs:
            out = render(spec)
            print(f"wrote {out}")
    except PlotkitError as exc:
        print(f"plotkit error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
