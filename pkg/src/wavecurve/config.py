"""Experiment configuration: TOML files with per-experiment tables.

Every experiment runs with built-in defaults when no config file is given;
unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import tomli

from .errors import ConfigError

ALL_SWEEPS = ("scatterer_bs", "ue_scatterer", "array_scale", "curvature")


def _from_mapping(cls, data: Mapping[str, Any]):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(
            f"unknown {cls.__name__} keys: {sorted(unknown)} (known: {sorted(known)})"
        )
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {cls.__name__}: {exc}") from exc


@dataclass
class Table1Config:
    sweeps: tuple[str, ...] = ALL_SWEEPS

    def __post_init__(self):
        self.sweeps = tuple(self.sweeps)
        bad = [s for s in self.sweeps if s not in ALL_SWEEPS]
        if bad or not self.sweeps:
            raise ConfigError(f"sweeps must be a nonempty subset of {ALL_SWEEPS}, got {self.sweeps}")


@dataclass
class Fig2Config:
    step: float = 0.05
    x_range: tuple[float, float] = (1.0, 6.0)
    y_range: tuple[float, float] = (-1.0, 1.0)
    z_range: tuple[float, float] = (-1.0, 1.0)
    ny: int = 64
    freq_hz: float = 7.5e9
    awc_radii: tuple[float, float] = (2.5, 4.5)
    swc_radius: float = 3.5

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigError("fig2 step must be positive")
        for name in ("x_range", "y_range", "z_range", "awc_radii"):
            v = tuple(getattr(self, name))
            if len(v) != 2:
                raise ConfigError(f"fig2 {name} must have two entries")
            setattr(self, name, v)


@dataclass
class Fig3Config:
    snr_grid_db: tuple[float, ...] = (
        -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0,
    )
    n_trials: int = 40
    ny: int = 64
    n_rf: int = 16
    p: int = 16
    kinds: tuple[str, ...] = ("awc", "swc")
    freq_hz: float = 7.5e9
    n_distance: int = 128

    def __post_init__(self):
        self.snr_grid_db = tuple(float(s) for s in self.snr_grid_db)
        self.kinds = tuple(self.kinds)
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must be nonempty")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.n_distance < 1:
            raise ConfigError("n_distance must be >= 1")
        bad = [k for k in self.kinds if k not in ("awc", "swc")]
        if bad or not self.kinds:
            raise ConfigError(f"kinds must be a nonempty subset of ('awc', 'swc'), got {self.kinds}")

    def paper_scale(self) -> "Fig3Config":
        return Fig3Config(
            snr_grid_db=self.snr_grid_db,
            n_trials=100,
            ny=128,
            n_rf=self.n_rf,
            p=self.p,
            kinds=self.kinds,
            freq_hz=15.0e9,
            n_distance=self.n_distance,
        )


@dataclass
class ValidateConfig:
    whiteness_draws: int = 20_000
    roundtrip_samples: int = 100

    def __post_init__(self):
        if self.whiteness_draws < 100 or self.roundtrip_samples < 1:
            raise ConfigError("validate sample counts too small")


@dataclass
class BenchConfig:
    table1: Table1Config = field(default_factory=Table1Config)
    fig2: Fig2Config = field(default_factory=Fig2Config)
    fig3: Fig3Config = field(default_factory=Fig3Config)
    validate: ValidateConfig = field(default_factory=ValidateConfig)


def load_config(path: str | Path | None) -> BenchConfig:
    """Parse a TOML config file (or return all defaults for None)."""
    if path is None:
        return BenchConfig()
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    known = {"table1", "fig2", "fig3", "validate"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config tables: {sorted(unknown)} (known: {sorted(known)})")
    return BenchConfig(
        table1=_from_mapping(Table1Config, data.get("table1", {})),
        fig2=_from_mapping(Fig2Config, data.get("fig2", {})),
        fig3=_from_mapping(Fig3Config, data.get("fig3", {})),
        validate=_from_mapping(ValidateConfig, data.get("validate", {})),
    )
