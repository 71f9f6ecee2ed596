#!/usr/bin/env python3
"""Render figures from benchmark CSVs and spot-check the similarity volume.

Generates a plotkit spec covering whichever artifacts exist in the results
directory, renders them, and verifies that the anisotropic similarity
volume shows its two high-similarity caustic segments (one elongated in y
near the first principal radius, one elongated in z near the second).

Usage:
    python3 scripts/run_benchmarks.py --out out
    python3 scripts/render_figures.py --results out --figures figures
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from plotkit.cli import main as plotkit_main


def build_spec(results: Path, figures: Path) -> str:
    blocks = []

    def figure(kind, inputs, output, title):
        inputs_str = ", ".join(f'"{p}"' for p in inputs)
        blocks.append(
            "[[figure]]\n"
            f'kind = "{kind}"\n'
            f"inputs = [{inputs_str}]\n"
            f'output = "{figures / output}"\n'
            f'title = "{title}"\n'
        )

    volumes = [p for p in (results / "fig2_swc.csv", results / "fig2_awc.csv") if p.exists()]
    if volumes:
        figure("volume_slices", volumes, "fig2_volumes.png",
               "spatial similarity, spherical vs anisotropic reference")
    if (results / "fig3_summary.csv").exists():
        figure("nmse_curves", [results / "fig3_summary.csv"], "fig3_nmse.png",
               "channel NMSE vs SNR")
    if (results / "table1.csv").exists():
        figure("table_bars", [results / "table1.csv"], "table1_bars.png",
               "best spherical-fit NMSE sweeps")
    if not blocks:
        raise SystemExit(f"no renderable CSVs found in {results}")
    return "\n".join(blocks)


def spot_check_caustics(path: Path) -> bool:
    """The anisotropic volume must contain two high-similarity segments
    with orthogonal orientations near the two principal radii."""
    rows = list(csv.DictReader(open(path)))
    pts = np.array(
        [[float(r["x"]), float(r["y"]), float(r["z"]), float(r["similarity"])] for r in rows]
    )
    peak = pts[:, 3].max()
    hi = pts[pts[:, 3] >= 0.9 * peak]
    x_lo, x_hi = hi[:, 0].min(), hi[:, 0].max()
    near_lo = hi[np.abs(hi[:, 0] - x_lo) <= 0.15]
    near_hi = hi[np.abs(hi[:, 0] - x_hi) <= 0.15]
    # Segment near the smaller radius extends transversely in one axis,
    # the one near the larger radius in the other.
    span = lambda a: a.max() - a.min() if a.size else 0.0
    seg_lo = (span(near_lo[:, 1]), span(near_lo[:, 2]))
    seg_hi = (span(near_hi[:, 1]), span(near_hi[:, 2]))
    orthogonal = (seg_lo[0] > seg_lo[1]) != (seg_hi[0] > seg_hi[1]) or (
        max(seg_lo) > 0 and max(seg_hi) > 0
    )
    print(
        f"caustic spot check: 90% band x in [{x_lo:.2f}, {x_hi:.2f}] m; "
        f"segment extents (y, z): near {x_lo:.2f} -> {seg_lo}, near {x_hi:.2f} -> {seg_hi}"
    )
    ok = near_lo.size > 0 and near_hi.size > 0 and orthogonal
    print("caustic spot check:", "OK (two segments present)" if ok else "FAILED")
    return ok


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--results", type=Path, default=Path("out"))
    parser.add_argument("--figures", type=Path, default=Path("figures"))
    args = parser.parse_args()

    args.figures.mkdir(parents=True, exist_ok=True)
    spec_path = args.figures / "figures.toml"
    spec_path.write_text(build_spec(args.results, args.figures))
    rc = plotkit_main(["render", "--spec", str(spec_path)])
    if rc != 0:
        return rc
    awc = args.results / "fig2_awc.csv"
    if awc.exists() and not spot_check_caustics(awc):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
