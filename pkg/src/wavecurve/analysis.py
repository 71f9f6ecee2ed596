"""Metrics and bounds: NMSE, cosine similarity, best spherical-wave fit,
spatial similarity volumes and Cramer-Rao lower bounds for both channel
models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .baseline import PolarDictionary, build_polar_dictionary
from .channel import AwcParams, awc_steering, swc_atom_and_jacobian, swc_params
from .errors import ConfigError
from .estimator import steering_jacobian
from .geometry import ArrayFrame
from .optimize import LMConfig, levenberg_marquardt
from .sounding import Combiner


def nmse(h_hat: np.ndarray, h: np.ndarray) -> float:
    h = np.asarray(h)
    h_hat = np.asarray(h_hat)
    denom = np.real(np.vdot(h, h))
    if denom <= 0:
        raise ValueError("reference channel has zero norm")
    diff = h_hat - h
    return float(np.real(np.vdot(diff, diff)) / denom)


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu <= 0 or nv <= 0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(np.abs(np.vdot(u, v)) / (nu * nv))


@dataclass
class SwcFitResult:
    nmse: float
    u: np.ndarray
    inv_r: float
    gain: complex

    def source_position(self, array: ArrayFrame) -> np.ndarray | None:
        if self.inv_r <= 1e-9:
            return None
        u = self.u
        x2 = max(0.0, 1.0 - float(u @ u))
        direction = (
            np.sqrt(x2) * array.normal + u[0] * array.axis_y + u[1] * array.axis_z
        )
        return array.center + direction / self.inv_r


@dataclass
class SwcFitConfig:
    n_distance: int = 96
    r_min: float = 0.5
    r_max: float = 200.0
    angle_pad: int = 2
    n_starts: int = 8
    lm: LMConfig | None = None


def best_swc_fit(
    h: np.ndarray, array: ArrayFrame, config: SwcFitConfig | None = None
) -> SwcFitResult:
    """Best single spherical-wave approximation of a channel vector.

    Coarse ring-wise FFT scan over (direction, reciprocal distance) with the
    gain in closed form, then local Levenberg-Marquardt refinement from the
    best few grid cells (the objective is multi-modal near caustics).
    """
    cfg = config or SwcFitConfig()
    h = np.asarray(h, dtype=complex)
    h_norm = np.linalg.norm(h)
    if h_norm <= 0:
        raise ValueError("zero channel")
    inv_r = np.linspace(1.0 / cfg.r_min, 1.0 / cfg.r_max, cfg.n_distance)
    inv_r = np.concatenate([inv_r, [0.0]])
    dictionary = PolarDictionary(
        array=array,
        ay=cfg.angle_pad * array.ny,
        az=cfg.angle_pad * array.nz,
        inv_r_grid=inv_r,
    )

    # Coarse scan: per ring keep the best few angular bins.
    starts = _top_grid_starts(dictionary, h, cfg.n_starts)

    lm_cfg = cfg.lm or LMConfig(max_iters=200, rel_tol=1e-13)
    best: SwcFitResult | None = None
    for u0, inv_r0 in starts:
        theta0 = np.array([u0[0], u0[1], inv_r0])

        def project(theta):
            theta = theta.copy()
            n = np.linalg.norm(theta[:2])
            if n > 0.98:
                theta[:2] *= 0.98 / n
            theta[2] = np.clip(theta[2], 0.0, 1.0 / cfg.r_min)
            return theta

        state = {}

        def residual(theta):
            c, jc = swc_atom_and_jacobian(theta[:2], theta[2], array)
            a = np.vdot(c, h)  # atoms are unit norm
            state["c"], state["jc"], state["a"] = c, jc, a
            return h - a * c

        def jacobian(theta):
            c, jc, a = state["c"], state["jc"], state["a"]
            # d/dtheta [ (c^H h) c ] = (jc^H h) c + a jc
            cols = [
                -(np.vdot(jc[:, j], h) * c + a * jc[:, j]) for j in range(3)
            ]
            return np.column_stack(cols)

        res = levenberg_marquardt(
            residual, theta0, jacobian=jacobian, config=lm_cfg, project=project
        )
        fit_nmse = res.cost / h_norm**2
        if best is None or fit_nmse < best.nmse:
            c, _ = swc_atom_and_jacobian(res.x[:2], res.x[2], array)
            best = SwcFitResult(
                nmse=float(fit_nmse),
                u=res.x[:2].copy(),
                inv_r=float(res.x[2]),
                gain=complex(np.vdot(c, h)),
            )
    assert best is not None
    return best


def _top_grid_starts(
    dictionary: PolarDictionary, h: np.ndarray, n_starts: int
) -> list[tuple[np.ndarray, float]]:
    arr = dictionary.array
    from .channel import unvec

    zm = unvec(h, arr.ny, arr.nz)
    d2l = arr.spacing**2 / arr.wavelength
    dy = (np.arange(arr.ny) - (arr.ny - 1) / 2.0)[:, None]
    dz = (np.arange(arr.nz) - (arr.nz - 1) / 2.0)[None, :]
    s2 = dy**2 + dz**2
    uy = dictionary.u_y
    uz = dictionary.u_z
    disk = uy[:, None] ** 2 + uz[None, :] ** 2 < dictionary.u_max**2
    candidates = []
    for ring, inv_r in enumerate(dictionary.inv_r_grid):
        comp = np.exp(1j * np.pi * d2l * inv_r * s2)
        corr = np.fft.fft2(comp * zm, s=(dictionary.ay, dictionary.az))
        mag = np.where(disk, np.abs(corr), -1.0)
        iy, iz = np.unravel_index(int(np.argmax(mag)), mag.shape)
        candidates.append(
            (float(mag[iy, iz]), ring, np.array([uy[iy], uz[iz]]), float(inv_r))
        )
    candidates.sort(key=lambda t: -t[0])
    # Greedy pick with ring-separation so the starts do not all cluster on
    # one lobe of the (multi-modal) reciprocal-distance profile.
    picked: list[tuple[np.ndarray, float]] = []
    used_rings: list[int] = []
    for _, ring, u, ir in candidates:
        if any(abs(ring - r0) < 3 for r0 in used_rings):
            continue
        picked.append((u, ir))
        used_rings.append(ring)
        if len(picked) >= n_starts:
            break
    return picked


@dataclass
class VolumeGrid:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @staticmethod
    def regular(
        x_range: tuple[float, float],
        y_range: tuple[float, float],
        z_range: tuple[float, float],
        step: float,
    ) -> "VolumeGrid":
        def axis(lo, hi):
            n = int(round((hi - lo) / step)) + 1
            return np.linspace(lo, hi, n)

        return VolumeGrid(axis(*x_range), axis(*y_range), axis(*z_range))


@dataclass
class SimilarityVolume:
    grid: VolumeGrid
    values: np.ndarray  # (nx, ny, nz)
    peak_value: float
    peak_xyz: np.ndarray

    def level_mask(self, fraction: float) -> np.ndarray:
        return self.values >= fraction * self.peak_value


def similarity_volume(
    h: np.ndarray, array: ArrayFrame, grid: VolumeGrid, chunk: int = 4096
) -> SimilarityVolume:
    """Cosine similarity between h and the point-source steering vector at
    every grid point."""
    h = np.asarray(h, dtype=complex)
    h_unit = h / np.linalg.norm(h)
    xs, ys, zs = np.meshgrid(grid.x, grid.y, grid.z, indexing="ij")
    pts = np.column_stack([xs.ravel(), ys.ravel(), zs.ravel()])
    arr = array
    lam, d = arr.wavelength, arr.spacing
    dy = arr.index_offsets()[0]
    dz = arr.index_offsets()[1]
    dyg = np.repeat(dy[:, None], arr.nz, axis=1).flatten(order="F")
    dzg = np.repeat(dz[None, :], arr.ny, axis=0).flatten(order="F")
    s2 = dyg**2 + dzg**2
    hn = np.conj(h_unit) / np.sqrt(arr.n)
    vals = np.empty(pts.shape[0])
    axes = np.column_stack([arr.axis_y, arr.axis_z])
    for i0 in range(0, pts.shape[0], chunk):
        p = pts[i0 : i0 + chunk] - arr.center
        r = np.linalg.norm(p, axis=1)
        r = np.maximum(r, 1e-9)
        s_hat = p / r[:, None]
        u = s_hat @ axes  # (B, 2)
        lin = u[:, :1] * dyg[None, :] + u[:, 1:2] * dzg[None, :]
        phase = -(d / lam) * lin + 0.5 * (d**2 / lam) * (1.0 / r)[:, None] * (
            s2[None, :] - lin**2
        )
        atoms = np.exp(-2j * np.pi * phase)
        vals[i0 : i0 + chunk] = np.abs(atoms @ hn)
    values = vals.reshape(xs.shape)
    idx = np.unravel_index(int(np.argmax(values)), values.shape)
    peak_xyz = np.array([grid.x[idx[0]], grid.y[idx[1]], grid.z[idx[2]]])
    return SimilarityVolume(
        grid=grid,
        values=values,
        peak_value=float(values[idx]),
        peak_xyz=peak_xyz,
    )


@dataclass
class CrlbReport:
    model: Literal["AWC", "SWC"]
    fisher: np.ndarray
    covariance: np.ndarray
    nmse_bound: float


def _complex_gain_columns(base: np.ndarray) -> list[np.ndarray]:
    """Derivative columns w.r.t. (Re g, Im g) of g*base."""
    return [base, 1j * base]


def crlb_nmse(
    params: AwcParams | tuple[np.ndarray, float, complex],
    combiner: Combiner,
    snr_db: float,
    model: Literal["AWC", "SWC"],
    array: ArrayFrame | None = None,
) -> CrlbReport:
    """Channel-domain Cramer-Rao bound at a given SNR.

    AWC model: 7 real parameters (Re g, Im g, k1, k2, q11, q12, q22);
    SWC model: 5 real parameters (Re g, Im g, u_y, u_z, 1/r), requiring
    `array` for the atom parameterization and `params` as (u, 1/r, gain).
    Unit per-element noise variance; the observation gain is scaled so that
    |g|^2 = snr.
    """
    ny, nz = combiner.ny, combiner.nz
    snr = 10.0 ** (snr_db / 10.0)
    if model == "AWC":
        assert isinstance(params, AwcParams)
        c = awc_steering(params.kbar, params.qbar, ny, nz)
        dc = steering_jacobian(params.kbar, params.qbar, ny, nz)  # (N, 5)
        g = np.sqrt(snr) * params.gain / abs(params.gain)
    elif model == "SWC":
        if array is None:
            raise ConfigError("SWC model requires the array frame")
        u, inv_r, gain = params
        c, dc = swc_atom_and_jacobian(np.asarray(u), float(inv_r), array)  # (N, 3)
        g = np.sqrt(snr) * gain / abs(gain)
    else:
        raise ConfigError(f"unknown model {model!r}")

    h_cols = _complex_gain_columns(c) + [g * dc[:, j] for j in range(dc.shape[1])]
    g_mat = np.column_stack(h_cols)  # (N, P) d h / d theta
    j_cols = [combiner.apply(col) for col in h_cols]
    j_mat = np.column_stack(j_cols)  # (M, P) d mu / d theta
    fisher = 2.0 * np.real(j_mat.conj().T @ j_mat)
    try:
        cov = np.linalg.inv(fisher)
    except np.linalg.LinAlgError:
        import warnings

        warnings.warn("singular Fisher information; using pseudo-inverse", stacklevel=2)
        cov = np.linalg.pinv(fisher)
    h_norm2 = snr  # |g c|^2 with unit-norm c
    bound = float(np.trace(np.real(g_mat.conj().T @ g_mat) @ cov) / h_norm2)
    return CrlbReport(model=model, fisher=fisher, covariance=cov, nmse_bound=bound)
