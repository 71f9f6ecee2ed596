"""Benchmark runners: anisotropy sweep table, similarity volumes,
NMSE-vs-SNR Monte-Carlo with CRLB, and the self-validation oracle suite.

All runners write CSV artifacts plus a JSON sidecar recording the full
configuration and master seed; outputs are bit-identical for identical
(config, seed).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .analysis import (
    VolumeGrid,
    best_swc_fit,
    crlb_nmse,
    nmse,
    similarity_volume,
)
from .baseline import build_polar_dictionary, omp, reconstruct, refine_swc
from .channel import (
    awc_steering,
    scenario_channel,
    scenario_to_awc,
    source_to_polar,
    swc_params,
)
from .config import BenchConfig, Fig2Config, Fig3Config, Table1Config, ValidateConfig
from .estimator import (
    estimate,
    forward_frequency_map,
    solve_curvature,
    steering_jacobian,
)
from .geometry import fermat_oracle, propagate, transverse_basis, WavefrontFrame
from .optimize import finite_difference_jacobian
from .scenarios import (
    ARRAY_SCALE_SWEEP,
    CURVATURE_SWEEP,
    SCATTERER_BS_SWEEP,
    UE_SCATTERER_SWEEP,
    default_scene,
    make_array,
    mirror_source,
    random_scene,
    sweep_array_scale,
    sweep_curvature,
    sweep_scatterer_bs_distance,
    sweep_ue_scatterer_distance,
)
from .sounding import make_srft_combiner, observe
from .channel import swc_atom_and_jacobian


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _write_csv(path: Path, header: list[str], rows: list[list[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_sidecar(path: Path, experiment: str, seed: int, cfg: Any, extra: dict | None = None) -> None:
    payload = {
        "experiment": experiment,
        "master_seed": seed,
        "version": __version__,
        "config": dataclasses.asdict(cfg),
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


# ---------------------------------------------------------------- table 1


def run_table1(cfg: Table1Config, seed: int, out_dir: Path) -> Path:
    """Best-spherical-fit NMSE across the four single-variable sweeps."""
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep_values: dict[str, list] = {
        "scatterer_bs": SCATTERER_BS_SWEEP,
        "ue_scatterer": UE_SCATTERER_SWEEP,
        "array_scale": ARRAY_SCALE_SWEEP,
        "curvature": CURVATURE_SWEEP,
    }
    builders = {
        "scatterer_bs": sweep_scatterer_bs_distance,
        "ue_scatterer": sweep_ue_scatterer_distance,
        "array_scale": lambda v: sweep_array_scale(*v),
        "curvature": sweep_curvature,
    }
    rows = []
    for sweep in cfg.sweeps:
        for value in sweep_values[sweep]:
            spec = builders[sweep](value)
            label = value[0] if sweep == "array_scale" else value
            try:
                scene = spec.build()
                h = scenario_channel(scene)
                fit = best_swc_fit(h, scene.array)
                rows.append(
                    [sweep, label, spec.ny, spec.freq_hz, fit.nmse, fit.inv_r, "", seed]
                )
            except Exception as exc:  # geometry violations surface per row
                rows.append([sweep, label, spec.ny, spec.freq_hz, "", "", repr(exc), seed])
    path = out_dir / "table1.csv"
    _write_csv(
        path,
        ["sweep", "value", "ny", "freq_hz", "nmse", "fit_inv_r", "error", "master_seed"],
        rows,
    )
    _write_sidecar(out_dir / "table1.json", "table1", seed, cfg)
    return path


# ---------------------------------------------------------------- fig 2


def fig2_channels(cfg: Fig2Config):
    """The two reference channels: anisotropic (two principal radii) and
    spherical (single radius), both broadside on an array at the origin."""
    array = make_array(center=np.zeros(3), ny=cfg.ny, freq_hz=cfg.freq_hz)
    scale = array.spacing**2 / array.wavelength
    q_awc = scale * np.diag([1.0 / cfg.awc_radii[0], 1.0 / cfg.awc_radii[1]])
    q_swc = scale * (1.0 / cfg.swc_radius) * np.eye(2)
    kbar = np.zeros(2)
    h_awc = awc_steering(kbar, q_awc, cfg.ny, cfg.ny)
    h_swc = awc_steering(kbar, q_swc, cfg.ny, cfg.ny)
    return array, h_awc, h_swc


def run_fig2(cfg: Fig2Config, seed: int, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    array, h_awc, h_swc = fig2_channels(cfg)
    grid = VolumeGrid.regular(cfg.x_range, cfg.y_range, cfg.z_range, cfg.step)
    summary_rows = []
    for kind, h in (("swc", h_swc), ("awc", h_awc)):
        vol = similarity_volume(h, array, grid)
        rows = []
        xs, ys, zs = np.meshgrid(grid.x, grid.y, grid.z, indexing="ij")
        flat = vol.values.ravel()
        for x, y, z, s in zip(xs.ravel(), ys.ravel(), zs.ravel(), flat):
            rows.append([float(x), float(y), float(z), float(s)])
        _write_csv(out_dir / f"fig2_{kind}.csv", ["x", "y", "z", "similarity"], rows)
        summary_rows.append(
            [
                kind,
                vol.peak_value,
                float(vol.peak_xyz[0]),
                float(vol.peak_xyz[1]),
                float(vol.peak_xyz[2]),
                int(vol.level_mask(0.8).sum()),
                int(vol.level_mask(0.9).sum()),
                seed,
            ]
        )
    path = out_dir / "fig2_summary.csv"
    _write_csv(
        path,
        ["kind", "peak_similarity", "peak_x", "peak_y", "peak_z",
         "level80_count", "level90_count", "master_seed"],
        summary_rows,
    )
    _write_sidecar(out_dir / "fig2.json", "fig2", seed, cfg)
    return path


# ---------------------------------------------------------------- fig 3


@dataclass
class TrialOutcome:
    kind: str
    trial: int
    snr_db: float
    algorithm: str
    nmse: float
    scene_seed: int
    combiner_seed: int
    noise_seed: int


def run_fig3_trial(
    cfg: Fig3Config, seed: int, kind: str, trial: int
) -> list[TrialOutcome]:
    """One Monte-Carlo trial: draw a scene, observe at every SNR, run both
    estimators and evaluate the parameter bounds."""
    kind_idx = ("awc", "swc").index(kind)
    state = np.random.SeedSequence([seed, kind_idx, trial]).generate_state(
        2 + len(cfg.snr_grid_db), dtype=np.uint64
    )
    scene_seed = int(state[0])
    combiner_seed = int(state[1])
    rng = np.random.default_rng(scene_seed)
    spec = random_scene(rng, kind=kind, ny=cfg.ny, freq_hz=cfg.freq_hz)
    scene = spec.build()
    h = scenario_channel(scene)
    params = scenario_to_awc(scene)
    combiner = make_srft_combiner(cfg.ny, cfg.ny, cfg.n_rf, cfg.p, combiner_seed)
    dictionary = build_polar_dictionary(scene.array, n_distance=cfg.n_distance)

    swc_truth = None
    if kind == "swc":
        u, inv_r = source_to_polar(mirror_source(spec), scene.array)
        swc_truth = (u, inv_r, params.gain)

    out: list[TrialOutcome] = []
    for i, snr_db in enumerate(cfg.snr_grid_db):
        noise_seed = int(state[2 + i])
        obs = observe(h, combiner, snr_db, noise_seed)
        h_ref = obs.a_scale * h

        res = estimate(obs.y, combiner)
        out.append(
            TrialOutcome(kind, trial, snr_db, "awc_estimator",
                         nmse(res.h_hat, h_ref), scene_seed, combiner_seed, noise_seed)
        )

        paths = omp(obs.y, combiner, dictionary)
        paths = refine_swc(obs.y, combiner, paths, scene.array)
        h_base = reconstruct(paths, scene.array)
        out.append(
            TrialOutcome(kind, trial, snr_db, "swc_omp_lm",
                         nmse(h_base, h_ref), scene_seed, combiner_seed, noise_seed)
        )

        bound_awc = crlb_nmse(params, combiner, snr_db, "AWC").nmse_bound
        out.append(
            TrialOutcome(kind, trial, snr_db, "crlb_awc",
                         bound_awc, scene_seed, combiner_seed, noise_seed)
        )
        if swc_truth is not None:
            bound_swc = crlb_nmse(
                swc_truth, combiner, snr_db, "SWC", array=scene.array
            ).nmse_bound
            out.append(
                TrialOutcome(kind, trial, snr_db, "crlb_swc",
                             bound_swc, scene_seed, combiner_seed, noise_seed)
            )
    return out


def run_fig3(cfg: Fig3Config, seed: int, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    trial_rows: list[list[Any]] = []
    outcomes: list[TrialOutcome] = []
    failures: list[tuple[str, int, str]] = []
    wall_total = 0.0
    for kind in cfg.kinds:
        for trial in range(cfg.n_trials):
            t0 = time.perf_counter()
            try:
                results = run_fig3_trial(cfg, seed, kind, trial)
            except Exception as exc:
                failures.append((kind, trial, repr(exc)))
                continue
            wall_total += time.perf_counter() - t0
            outcomes.extend(results)
            for r in results:
                trial_rows.append(
                    [r.kind, r.trial, r.snr_db, r.algorithm, r.nmse,
                     r.scene_seed, r.combiner_seed, r.noise_seed, seed]
                )
    # Timing stays out of the CSVs so identical (config, seed) runs produce
    # bit-identical artifacts; it is logged to stderr instead.
    print(f"fig3: {len(trial_rows)} rows in {wall_total:.1f}s", file=sys.stderr)
    _write_csv(
        out_dir / "fig3_trials.csv",
        ["kind", "trial", "snr_db", "algorithm", "nmse",
         "scene_seed", "combiner_seed", "noise_seed", "master_seed"],
        trial_rows,
    )

    summary_rows = []
    for kind in cfg.kinds:
        algos = ["awc_estimator", "swc_omp_lm", "crlb_awc"] + (
            ["crlb_swc"] if kind == "swc" else []
        )
        for snr_db in cfg.snr_grid_db:
            for algo in algos:
                vals = [
                    o.nmse for o in outcomes
                    if o.kind == kind and o.snr_db == snr_db and o.algorithm == algo
                ]
                if not vals:
                    continue
                mean = float(np.mean(vals))
                summary_rows.append(
                    [kind, snr_db, algo, mean, 10.0 * np.log10(max(mean, 1e-300)),
                     len(vals), seed]
                )
    path = out_dir / "fig3_summary.csv"
    _write_csv(
        path,
        ["kind", "snr_db", "algorithm", "mean_nmse", "mean_nmse_db",
         "n_trials", "master_seed"],
        summary_rows,
    )
    _write_sidecar(
        out_dir / "fig3.json", "fig3", seed, cfg,
        extra={"failures": [list(f) for f in failures], "n_failures": len(failures)},
    )
    return path


# ---------------------------------------------------------------- validate


@dataclass
class Check:
    name: str
    measured: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.measured < self.threshold


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"{tag} {c.name}: measured {c.measured:.3e} < {c.threshold:.3e}")
        return out


def _check_fermat_phase() -> Check:
    """Second-order phase model vs exact minimal path lengths on the
    default scene, sampled over the aperture."""
    spec = default_scene()
    scene = spec.build()
    params = scenario_to_awc(scene)
    arr = scene.array
    lam = arr.wavelength
    s0 = fermat_oracle(scene.ue, scene.scatterer, arr.center)
    dy, dz = arr.index_offsets()
    idx = np.linspace(0, arr.ny - 1, 9).astype(int)
    worst = 0.0
    for iy in idx:
        for iz in idx:
            p = (
                arr.center
                + arr.spacing * dy[iy] * arr.axis_y
                + arr.spacing * dz[iz] * arr.axis_z
            )
            exact = -2 * np.pi * (fermat_oracle(scene.ue, scene.scatterer, p) - s0) / lam
            n = np.array([dy[iy], dz[iz]])
            model = -2 * np.pi * (
                params.kbar @ n + 0.5 * n @ params.qbar @ n
            )
            err = abs((exact - model + np.pi) % (2 * np.pi) - np.pi)
            worst = max(worst, err)
    return Check("fermat_phase_rad", worst, 0.15)


def _check_freq_roundtrip(rng: np.random.Generator, samples: int) -> Check:
    worst = 0.0
    for _ in range(samples):
        q = rng.normal(scale=1e-3, size=(2, 2))
        q = 0.5 * (q + q.T)
        dy, dz = int(rng.integers(1, 40)), int(rng.integers(1, 40))
        f = forward_frequency_map(q, dy, dz)
        q_hat = solve_curvature(*f, dy, dz)
        worst = max(worst, float(np.max(np.abs(q_hat - q))))
    return Check("curvature_roundtrip", worst, 1e-12)


def _rel_jac_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.max(np.abs(numeric), axis=0)
    scale[scale == 0] = 1.0
    return float(np.max(np.abs(analytic - numeric) / scale[None, :]))


def _check_jacobian_awc(rng: np.random.Generator) -> Check:
    ny = nz = 16
    kbar = rng.uniform(-0.3, 0.3, size=2)
    qbar = rng.normal(scale=1e-3, size=(2, 2))
    qbar = 0.5 * (qbar + qbar.T)
    theta0 = np.array([kbar[0], kbar[1], qbar[0, 0], qbar[0, 1], qbar[1, 1]])

    def resid(theta):
        q = np.array([[theta[2], theta[3]], [theta[3], theta[4]]])
        return awc_steering(theta[:2], q, ny, nz)

    numeric = finite_difference_jacobian(resid, theta0)
    analytic = steering_jacobian(kbar, qbar, ny, nz)
    return Check("jacobian_awc_rel", _rel_jac_err(analytic, numeric), 1e-4)


def _check_jacobian_swc(rng: np.random.Generator) -> Check:
    array = make_array(center=np.zeros(3), ny=16, freq_hz=15e9)
    u = rng.uniform(-0.4, 0.4, size=2)
    inv_r = float(rng.uniform(0.02, 0.3))
    theta0 = np.array([u[0], u[1], inv_r])

    def resid(theta):
        c, _ = swc_atom_and_jacobian(theta[:2], theta[2], array)
        return c

    numeric = finite_difference_jacobian(resid, theta0)
    _, analytic = swc_atom_and_jacobian(u, inv_r, array)
    return Check("jacobian_swc_rel", _rel_jac_err(analytic, numeric), 1e-4)


def _check_srft_whiteness(rng: np.random.Generator, draws: int) -> Check:
    comb = make_srft_combiner(16, 16, 8, 8, int(rng.integers(2**31)))
    w = comb.dense()
    noise = (
        rng.standard_normal((draws, comb.n)) + 1j * rng.standard_normal((draws, comb.n))
    ) / np.sqrt(2.0)
    y = noise @ w.T
    cov = (y.conj().T @ y) / draws
    return Check(
        "srft_whiteness", float(np.max(np.abs(cov - np.eye(comb.m)))), 0.05
    )


def _check_semigroup(rng: np.random.Generator) -> Check:
    worst = 0.0
    for _ in range(50):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        u1, u2 = transverse_basis(direction)
        q = rng.normal(scale=0.2, size=(2, 2))
        q = 0.5 * (q + q.T)
        frame = WavefrontFrame(direction, u1, u2, q)
        s1, s2 = rng.uniform(0.1, 5.0, size=2)
        try:
            lhs = propagate(propagate(frame, s1), s2).Q
            rhs = propagate(frame, s1 + s2).Q
        except Exception:
            continue
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return Check("propagate_semigroup", worst, 1e-10)


def _check_adjoint(rng: np.random.Generator) -> Check:
    comb = make_srft_combiner(16, 16, 8, 8, int(rng.integers(2**31)))
    x = rng.standard_normal(comb.n) + 1j * rng.standard_normal(comb.n)
    y = rng.standard_normal(comb.m) + 1j * rng.standard_normal(comb.m)
    lhs = np.vdot(comb.apply(x), y)
    rhs = np.vdot(x, comb.adjoint(y))
    w = comb.dense()
    gram = w @ w.conj().T
    return Check(
        "srft_adjoint_unitary",
        max(abs(lhs - rhs), float(np.max(np.abs(gram - np.eye(comb.m))))),
        1e-10,
    )


def run_validate(cfg: ValidateConfig, seed: int, out_dir: Path | None = None) -> ValidationReport:
    rng = np.random.default_rng(seed)
    checks = [
        _check_fermat_phase(),
        _check_freq_roundtrip(rng, cfg.roundtrip_samples),
        _check_jacobian_awc(rng),
        _check_jacobian_swc(rng),
        _check_srft_whiteness(rng, cfg.whiteness_draws),
        _check_semigroup(rng),
        _check_adjoint(rng),
    ]
    report = ValidationReport(checks=checks)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_csv(
            out_dir / "validate.csv",
            ["check", "measured", "threshold", "passed", "master_seed"],
            [[c.name, c.measured, c.threshold, c.passed, seed] for c in checks],
        )
        _write_sidecar(out_dir / "validate.json", "validate", seed, cfg)
    return report


def run_experiment(name: str, cfg: BenchConfig, seed: int, out_dir: Path) -> Any:
    if name == "table1":
        return run_table1(cfg.table1, seed, out_dir)
    if name == "fig2":
        return run_fig2(cfg.fig2, seed, out_dir)
    if name == "fig3":
        return run_fig3(cfg.fig3, seed, out_dir)
    if name == "validate":
        return run_validate(cfg.validate, seed, out_dir)
    raise ValueError(f"unknown experiment {name!r}")
