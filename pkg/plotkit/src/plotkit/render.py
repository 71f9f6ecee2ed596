"""Renderers for the three figure kinds.

All renderers are read-only over their inputs and write the output image
atomically (temp file in the target directory, then rename), so a failed
render never leaves a partial file behind.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .spec import FigureSpec, PlotkitError  # noqa: E402


def _read_csv(path: Path, required: list[str]) -> list[dict[str, str]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            rows = list(reader)
    except FileNotFoundError as exc:
        raise PlotkitError(f"input CSV not found: {path}") from exc
    missing = [c for c in required if c not in header]
    if missing:
        raise PlotkitError(
            f"{path}: missing required columns {missing} (found {header})"
        )
    if not rows:
        raise PlotkitError(f"{path}: no data rows")
    return rows


def _atomic_savefig(fig, output: Path) -> None:
    output.parent.mkdir(parents=True, exist_ok=True)
    tmp = output.with_name(output.name + f".tmp{os.getpid()}")
    try:
        fig.savefig(tmp, format=output.suffix.lstrip(".") or "png", dpi=150)
        os.replace(tmp, output)
    finally:
        plt.close(fig)
        if tmp.exists():
            tmp.unlink()


def _pivot_slice(rows, axis: str, value: float | None):
    """Extract the 2D slice of a regular (x, y, z, similarity) grid closest
    to ``axis = value`` and return (plane axes names, coords, 2D values)."""
    pts = {
        k: np.array([float(r[k]) for r in rows]) for k in ("x", "y", "z", "similarity")
    }
    others = [a for a in ("x", "y", "z") if a != axis]
    levels = np.unique(pts[axis])
    target = levels[np.argmin(np.abs(levels - (value if value is not None else 0.0)))]
    sel = pts[axis] == target
    a0 = np.unique(pts[others[0]][sel])
    a1 = np.unique(pts[others[1]][sel])
    grid = np.full((a0.size, a1.size), np.nan)
    i0 = np.searchsorted(a0, pts[others[0]][sel])
    i1 = np.searchsorted(a1, pts[others[1]][sel])
    grid[i0, i1] = pts["similarity"][sel]
    if np.isnan(grid).any():
        raise PlotkitError(f"volume CSV is not a complete regular grid at {axis}={target}")
    return others, (a0, a1), grid, target


def _render_volume_slices(spec: FigureSpec) -> None:
    slice_axes = spec.options.get("slice_axes", ["z", "y"])
    slice_value = spec.options.get("slice_value", 0.0)
    cmap = spec.options.get("cmap", "viridis")
    n_rows = len(spec.inputs)
    n_cols = len(slice_axes)
    fig, axes = plt.subplots(
        n_rows, n_cols, figsize=(5.2 * n_cols, 4.0 * n_rows), squeeze=False
    )
    for i, path in enumerate(spec.inputs):
        rows = _read_csv(Path(path), ["x", "y", "z", "similarity"])
        peak = max(float(r["similarity"]) for r in rows)
        for j, axis in enumerate(slice_axes):
            names, (a0, a1), grid, level = _pivot_slice(rows, axis, slice_value)
            ax = axes[i][j]
            im = ax.pcolormesh(a0, a1, grid.T, cmap=cmap, shading="nearest",
                               vmin=0.0, vmax=max(peak, 1e-12))
            ax.contour(
                a0, a1, grid.T,
                levels=[0.8 * peak, 0.9 * peak],
                colors=["white", "red"], linewidths=1.0,
            )
            ax.set_xlabel(f"{names[0]} [m]")
            ax.set_ylabel(f"{names[1]} [m]")
            ax.set_title(f"{Path(path).stem}  ({axis} = {level:g} m)")
            fig.colorbar(im, ax=ax, label="similarity")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    _atomic_savefig(fig, spec.output)


def _render_nmse_curves(spec: FigureSpec) -> None:
    rows = []
    for path in spec.inputs:
        rows.extend(
            _read_csv(Path(path), ["kind", "snr_db", "algorithm", "mean_nmse_db"])
        )
    kinds = sorted({r["kind"] for r in rows})
    fig, axes = plt.subplots(1, len(kinds), figsize=(5.6 * len(kinds), 4.2),
                             squeeze=False, sharey=True)
    for ax, kind in zip(axes[0], kinds):
        sub = [r for r in rows if r["kind"] == kind]
        for algo in sorted({r["algorithm"] for r in sub}):
            pts = sorted(
                (float(r["snr_db"]), float(r["mean_nmse_db"]))
                for r in sub
                if r["algorithm"] == algo
            )
            style = "--" if algo.startswith("crlb") else "-o"
            ax.plot([p[0] for p in pts], [p[1] for p in pts], style,
                    label=algo, markersize=4)
        ax.set_xlabel("SNR [dB]")
        ax.set_title(f"{kind} scenes")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
    axes[0][0].set_ylabel("mean NMSE [dB]")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    _atomic_savefig(fig, spec.output)


def _render_table_bars(spec: FigureSpec) -> None:
    rows = []
    for path in spec.inputs:
        rows.extend(_read_csv(Path(path), ["sweep", "value", "nmse"]))
    rows = [r for r in rows if r["nmse"] != ""]
    if not rows:
        raise PlotkitError("table CSV has no successful cells")
    sweeps = sorted({r["sweep"] for r in rows})
    fig, axes = plt.subplots(1, len(sweeps), figsize=(4.2 * len(sweeps), 3.8),
                             squeeze=False)
    for ax, sweep in zip(axes[0], sweeps):
        sub = [r for r in rows if r["sweep"] == sweep]
        labels = [r["value"] for r in sub]
        vals = [max(float(r["nmse"]), 1e-16) for r in sub]
        ax.bar(range(len(sub)), vals)
        ax.set_xticks(range(len(sub)), labels)
        ax.set_yscale("log")
        ax.set_title(sweep)
        ax.set_ylabel("best-fit NMSE")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    _atomic_savefig(fig, spec.output)


_RENDERERS = {
    "volume_slices": _render_volume_slices,
    "nmse_curves": _render_nmse_curves,
    "table_bars": _render_table_bars,
}


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the output path."""
    _RENDERERS[spec.kind](spec)
    return spec.output
