#!/usr/bin/env python3
"""Run every benchmark experiment into one output directory.

Usage:
    python3 scripts/run_benchmarks.py --out out --seed 0
    python3 scripts/run_benchmarks.py --out out_full --paper-scale

The fig3 Monte-Carlo dominates the runtime (roughly 10 minutes at desk
scale, hours at paper scale); pass --only to run a subset.
"""

import argparse
import sys
import time

from wavecurve.cli import EXPERIMENTS, main as wavecurve_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--paper-scale", action="store_true")
    parser.add_argument("--trials", type=int, default=None)
    parser.add_argument(
        "--only", nargs="+", choices=EXPERIMENTS, default=list(EXPERIMENTS)
    )
    args = parser.parse_args()

    for name in args.only:
        argv = [name, "--seed", str(args.seed), "--out", args.out]
        if args.paper_scale:
            argv.append("--paper-scale")
        if args.trials is not None and name == "fig3":
            argv += ["--trials", str(args.trials)]
        print(f"=== {name} ===", flush=True)
        t0 = time.perf_counter()
        rc = wavecurve_main(argv)
        print(f"=== {name} done in {time.perf_counter() - t0:.1f}s (rc={rc})", flush=True)
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    sys.exit(main())
