"""Figure specifications: which CSVs to read, what to draw, where to write.

A spec file is TOML with one or more ``[[figure]]`` tables::

    [[figure]]
    kind = "volume_slices"          # volume_slices | nmse_curves | table_bars
    inputs = ["out/fig2_awc.csv"]
    output = "figures/fig2_awc.png"
    title = "anisotropic reference"  # optional
    [figure.options]                 # optional styling knobs
    slice_axis = "z"
    slice_value = 0.0
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

KINDS = ("volume_slices", "nmse_curves", "table_bars")


class PlotkitError(Exception):
    """Bad spec, missing input, or schema mismatch."""


@dataclass
class FigureSpec:
    kind: str
    inputs: tuple[Path, ...]
    output: Path
    title: str = ""
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise PlotkitError(f"unknown figure kind {self.kind!r} (known: {KINDS})")
        self.inputs = tuple(Path(p) for p in self.inputs)
        if not self.inputs:
            raise PlotkitError("figure needs at least one input CSV")
        self.output = Path(self.output)


def load_spec(path: str | Path) -> list[FigureSpec]:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise PlotkitError(f"spec file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise PlotkitError(f"spec parse error in {path}: {exc}") from exc
    figures = data.get("figure")
    if not figures:
        raise PlotkitError(f"{path} defines no [[figure]] tables")
    specs = []
    for i, fig in enumerate(figures):
        known = {"kind", "inputs", "output", "title", "options"}
        unknown = set(fig) - known
        if unknown:
            raise PlotkitError(
                f"figure #{i}: unknown keys {sorted(unknown)} (known: {sorted(known)})"
            )
        missing = {"kind", "inputs", "output"} - set(fig)
        if missing:
            raise PlotkitError(f"figure #{i}: missing keys {sorted(missing)}")
        specs.append(
            FigureSpec(
                kind=fig["kind"],
                inputs=tuple(fig["inputs"]),
                output=fig["output"],
                title=fig.get("title", ""),
                options=dict(fig.get("options", {})),
            )
        )
    return specs
