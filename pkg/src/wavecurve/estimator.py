"""Parameter-recovery channel estimator for anisotropic wavefronts.

Pipeline: FFT-domain subspace recovery of a coarse channel matrix,
conjugate phase differencing to turn the quadratic phase into two
single-frequency exponentials, a constrained joint peak search for their
frequencies, closed-form curvature solve, phase-compensated direction
estimation, and Levenberg-Marquardt refinement against the raw
observations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import ndimage

from .channel import AwcParams, awc_steering, phase_grid, unvec, vec, wrap_half
from .errors import ConfigError
from .optimize import LMConfig, LMResult, levenberg_marquardt
from .sounding import Combiner


@dataclass
class EstimatorConfig:
    smooth_kernel: int = 5
    kadane_sigma_mult: float = 3.0
    delta_y: int | None = None  # defaults to ny // 4
    delta_z: int | None = None  # defaults to nz // 4
    fft_zeropad: int = 4
    lm: LMConfig = field(default_factory=lambda: LMConfig(max_iters=100))

    def __post_init__(self):
        if self.smooth_kernel % 2 != 1 or self.smooth_kernel < 1:
            raise ConfigError("smooth_kernel must be odd and positive")
        if self.fft_zeropad < 1:
            raise ConfigError("fft_zeropad must be >= 1")

    def deltas(self, ny: int, nz: int) -> tuple[int, int]:
        dy = self.delta_y if self.delta_y is not None else max(1, ny // 4)
        dz = self.delta_z if self.delta_z is not None else max(1, nz // 4)
        if not (1 <= dy < ny and 1 <= dz < nz):
            raise ConfigError("shifts must satisfy 1 <= delta < array dim")
        return dy, dz


@dataclass
class PhaseDiffPair:
    """The two differential matrices and their (diagnostic) constant phases."""

    psi1: np.ndarray
    psi2: np.ndarray
    phi1: float | None = None
    phi2: float | None = None


@dataclass
class EstimateResult:
    params: AwcParams
    h_hat: np.ndarray
    stages: dict[str, Any]


def max_sum_rectangle(mat: np.ndarray) -> tuple[int, int, int, int]:
    """Axis-aligned rectangle maximizing the enclosed sum.

    Returns inclusive bounds (row1, row2, col1, col2).  2D Kadane: for each
    row pair, the best column interval of the column-sum vector is found via
    running prefix minima, O(rows^2 * cols).
    """
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        raise ValueError("empty matrix")
    rows, cols = mat.shape
    prefix = np.vstack([np.zeros((1, cols)), np.cumsum(mat, axis=0)])
    best = -np.inf
    best_box = (0, 0, 0, 0)
    for r1 in range(rows):
        for r2 in range(r1, rows):
            strip = prefix[r2 + 1] - prefix[r1]
            cs = np.concatenate([[0.0], np.cumsum(strip)])
            running_min = np.minimum.accumulate(cs[:-1])
            gains = cs[1:] - running_min
            c2 = int(np.argmax(gains))
            if gains[c2] > best:
                c1 = int(np.argmin(cs[: c2 + 1]))
                best = gains[c2]
                best_box = (r1, r2, c1, c2)
    return best_box


def _centered_roll(power: np.ndarray) -> tuple[int, int]:
    """Shift that moves the argmax bin to the matrix center."""
    iy, iz = np.unravel_index(int(np.argmax(power)), power.shape)
    return power.shape[0] // 2 - iy, power.shape[1] // 2 - iz


def recover_channel(
    y: np.ndarray,
    combiner: Combiner,
    config: EstimatorConfig,
) -> tuple[np.ndarray, dict[str, Any]]:
    """Coarse channel matrix from the observations.

    Back-projects with W^H, locates the energy-concentrated spectral box
    (smoothed power spectrum, mean + k*sigma threshold, maximum-sum
    rectangle), zeroes everything outside it and inverts the FFT.  The box
    search runs on a circularly re-centered spectrum so near-edge (wrapped)
    energy regions stay contiguous.
    """
    ny, nz = combiner.ny, combiner.nz
    x = unvec(combiner.adjoint(y), ny, nz)
    spec = np.fft.fft2(x)
    power = np.abs(spec) ** 2
    smoothed = ndimage.uniform_filter(power, size=config.smooth_kernel, mode="wrap")
    shifted = smoothed - (smoothed.mean() + config.kadane_sigma_mult * smoothed.std())

    ry, rz = _centered_roll(smoothed)
    rolled = np.roll(shifted, (ry, rz), axis=(0, 1))
    fallback = False
    if np.all(rolled <= 0):
        # Degenerate input: keep only the single largest bin.
        iy, iz = np.unravel_index(int(np.argmax(smoothed)), smoothed.shape)
        box = (iy, iy, iz, iz)
        mask = np.zeros((ny, nz), dtype=bool)
        mask[iy, iz] = True
        fallback = True
    else:
        r1, r2, c1, c2 = max_sum_rectangle(rolled)
        mask_rolled = np.zeros((ny, nz), dtype=bool)
        mask_rolled[r1 : r2 + 1, c1 : c2 + 1] = True
        mask = np.roll(mask_rolled, (-ry, -rz), axis=(0, 1))
        box = (r1 - ry, r2 - ry, c1 - rz, c2 - rz)  # in unrolled bin offsets
    h_hat = np.fft.ifft2(np.where(mask, spec, 0.0))
    diag = {
        "subspace_box": box,
        "box_bins": int(mask.sum()),
        "box_fallback": fallback,
    }
    return h_hat, diag


def phase_difference(h_mat: np.ndarray, delta_y: int, delta_z: int) -> PhaseDiffPair:
    """Conjugate products of shifted sub-matrices.

    psi1 differences along (+dy, +dz) (top-left vs bottom-right), psi2 along
    (+dy, -dz) (top-right vs bottom-left); a pure quadratic-phase input
    turns into exact 2D single-frequency exponentials.
    """
    ny, nz = h_mat.shape
    if not (1 <= delta_y < ny and 1 <= delta_z < nz):
        raise ConfigError("shifts out of bounds")
    psi1 = np.conj(h_mat[: ny - delta_y, : nz - delta_z]) * h_mat[delta_y:, delta_z:]
    psi2 = np.conj(h_mat[: ny - delta_y, delta_z:]) * h_mat[delta_y:, : nz - delta_z]
    return PhaseDiffPair(psi1=psi1, psi2=psi2)


def forward_frequency_map(
    qbar: np.ndarray, delta_y: int, delta_z: int
) -> tuple[float, float, float, float]:
    """Frequencies of the two differential matrices for a given curvature."""
    f1 = -qbar @ np.array([delta_y, delta_z], dtype=float)
    f2 = -qbar @ np.array([delta_y, -delta_z], dtype=float)
    return f1[0], f1[1], f2[0], f2[1]


def solve_curvature(
    f1y: float, f1z: float, f2y: float, f2z: float, delta_y: int, delta_z: int
) -> np.ndarray:
    """Closed-form curvature matrix from the differential frequencies."""
    q11 = (-f1y - f2y) / (2.0 * delta_y)
    q22 = (-f1z + f2z) / (2.0 * delta_z)
    q12 = 0.5 * ((-f1y + f2y) / (2.0 * delta_z) + (-f1z - f2z) / (2.0 * delta_y))
    return np.array([[q11, q12], [q12, q22]])


def _quadratic_refine(logp: np.ndarray, idx: int, size: int) -> float:
    """Parabolic sub-bin offset from three log-power samples along one axis."""
    lo = logp[(idx - 1) % size]
    c = logp[idx]
    hi = logp[(idx + 1) % size]
    denom = lo - 2.0 * c + hi
    if denom >= -1e-300:
        return 0.0
    off = 0.5 * (lo - hi) / denom
    return float(np.clip(off, -0.5, 0.5))


def _refine_peak(power: np.ndarray, iy: int, iz: int) -> tuple[float, float]:
    """Sub-bin frequency of a 2D periodogram peak (cycles per sample)."""
    ly, lz = power.shape
    logp = np.log(np.maximum(power, 1e-300))
    off_y = _quadratic_refine(logp[:, iz], iy, ly)
    off_z = _quadratic_refine(logp[iy, :], iz, lz)
    fy = wrap_half((iy + off_y) / ly)
    fz = wrap_half((iz + off_z) / lz)
    return float(fy), float(fz)


def joint_peak_search(
    pair: PhaseDiffPair,
    delta_y: int,
    delta_z: int,
    config: EstimatorConfig,
) -> tuple[float, float, float, float, float]:
    """Constrained peak search on the two differential spectra.

    The genuine frequencies satisfy dy*f1y - dz*f1z = dy*f2y + dz*f2z = V,
    so candidates on each zero-padded spectrum are grouped by their realized
    intercept; the selected intercept maximizes the smaller of the two
    per-line peak powers (ties broken toward the smallest |V|).  The winning
    bins are refined by 3x3 quadratic interpolation of log power.
    """
    zp = config.fft_zeropad
    my, mz = pair.psi1.shape
    ly, lz = zp * my, zp * mz
    p1 = np.abs(np.fft.fft2(pair.psi1, s=(ly, lz))) ** 2
    p2 = np.abs(np.fft.fft2(pair.psi2, s=(ly, lz))) ** 2
    fy = wrap_half(np.fft.fftfreq(ly))
    fz = wrap_half(np.fft.fftfreq(lz))
    v1 = delta_y * fy[:, None] - delta_z * fz[None, :]
    v2 = delta_y * fy[:, None] + delta_z * fz[None, :]
    v_step = max(delta_y / ly, delta_z / lz)
    k1 = np.rint(v1 / v_step).astype(np.int64)
    k2 = np.rint(v2 / v_step).astype(np.int64)

    kmin = int(min(k1.min(), k2.min()))
    kmax = int(max(k1.max(), k2.max()))
    nk = kmax - kmin + 1
    m1 = np.full(nk, -np.inf)
    m2 = np.full(nk, -np.inf)
    np.maximum.at(m1, (k1 - kmin).ravel(), p1.ravel())
    np.maximum.at(m2, (k2 - kmin).ravel(), p2.ravel())
    score = np.minimum(m1, m2)
    ks = np.arange(kmin, kmax + 1)
    order = np.lexsort((np.abs(ks), -score))
    k_star = int(ks[order[0]])
    v_star = k_star * v_step

    def line_peak(power, keys):
        masked = np.where(keys == k_star, power, -np.inf)
        iy, iz = np.unravel_index(int(np.argmax(masked)), power.shape)
        return _refine_peak(power, int(iy), int(iz))

    f1y, f1z = line_peak(p1, k1)
    f2y, f2z = line_peak(p2, k2)
    return f1y, f1z, f2y, f2z, float(v_star)


def estimate_direction(
    h_mat: np.ndarray, qbar: np.ndarray, config: EstimatorConfig
) -> np.ndarray:
    """Direction after compensating the estimated quadratic phase."""
    ny, nz = h_mat.shape
    comp = np.exp(2j * np.pi * phase_grid(np.zeros(2), qbar, ny, nz))
    resid = comp * h_mat
    zp = config.fft_zeropad
    power = np.abs(np.fft.fft2(resid, s=(zp * ny, zp * nz))) ** 2
    iy, iz = np.unravel_index(int(np.argmax(power)), power.shape)
    fy, fz = _refine_peak(power, int(iy), int(iz))
    # The channel phase is -2*pi*kbar^T n, so the periodogram peak sits at -kbar.
    return wrap_half(np.array([-fy, -fz]))


def _vec_maps(ny: int, nz: int) -> np.ndarray:
    """(5, N) phase-derivative maps for (k1, k2, q11, q12, q22), vec'd."""
    dy = np.arange(ny) - (ny - 1) / 2.0
    dz = np.arange(nz) - (nz - 1) / 2.0
    dyg = np.repeat(dy[:, None], nz, axis=1)
    dzg = np.repeat(dz[None, :], ny, axis=0)
    rows = [dyg, dzg, 0.5 * dyg**2, dyg * dzg, 0.5 * dzg**2]
    return np.stack([vec(r) for r in rows], axis=0)


def steering_jacobian(kbar: np.ndarray, qbar: np.ndarray, ny: int, nz: int) -> np.ndarray:
    """Analytic (N, 5) Jacobian of the steering vector w.r.t.
    (k1, k2, q11, q12, q22)."""
    c = awc_steering(kbar, qbar, ny, nz)
    maps = _vec_maps(ny, nz)
    return (-2j * np.pi) * maps.T * c[:, None]


def _theta_to_params(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    kbar = theta[:2]
    qbar = np.array([[theta[2], theta[3]], [theta[3], theta[4]]])
    return kbar, qbar


def lm_refine(
    y: np.ndarray,
    combiner: Combiner,
    init: AwcParams,
    config: EstimatorConfig,
) -> tuple[AwcParams, LMResult]:
    """Refine (kbar, qbar) against the raw observations.

    The gain is eliminated in closed form each residual evaluation,
    a = (Wc)^H y / |Wc|^2, and held fixed within each Jacobian.
    """
    ny, nz = combiner.ny, combiner.nz
    theta0 = np.array(
        [
            init.kbar[0],
            init.kbar[1],
            init.qbar[0, 0],
            init.qbar[0, 1],
            init.qbar[1, 1],
        ]
    )

    def gain_and_wc(theta):
        kbar, qbar = _theta_to_params(theta)
        c = awc_steering(kbar, qbar, ny, nz)
        wc = combiner.apply(c)
        denom = np.real(np.vdot(wc, wc))
        a = np.vdot(wc, y) / denom if denom > 0 else 0.0
        return c, wc, a

    def residual(theta):
        _, wc, a = gain_and_wc(theta)
        return y - a * wc

    def jacobian(theta):
        kbar, qbar = _theta_to_params(theta)
        _, _, a = gain_and_wc(theta)
        dc = steering_jacobian(kbar, qbar, ny, nz)
        cols = [-a * combiner.apply(dc[:, j]) for j in range(5)]
        return np.column_stack(cols)

    res = levenberg_marquardt(residual, theta0, jacobian=jacobian, config=config.lm)
    kbar, qbar = _theta_to_params(res.x)
    _, _, a = gain_and_wc(res.x)
    return AwcParams(kbar=kbar, qbar=qbar, gain=a), res


def estimate(
    y: np.ndarray, combiner: Combiner, config: EstimatorConfig | None = None
) -> EstimateResult:
    """Full estimation pipeline; returns parameters, the reconstructed
    channel and per-stage diagnostics."""
    config = config or EstimatorConfig()
    ny, nz = combiner.ny, combiner.nz
    dy, dz = config.deltas(ny, nz)

    h_mat, diag = recover_channel(y, combiner, config)
    pair = phase_difference(h_mat, dy, dz)
    f1y, f1z, f2y, f2z, v_star = joint_peak_search(pair, dy, dz, config)
    qbar0 = solve_curvature(f1y, f1z, f2y, f2z, dy, dz)
    kbar0 = estimate_direction(h_mat, qbar0, config)

    init = AwcParams(kbar=kbar0, qbar=qbar0, gain=1.0)
    params, lm_res = lm_refine(y, combiner, init, config)
    c = awc_steering(params.kbar, params.qbar, ny, nz)
    h_hat = params.gain * c

    diag.update(
        raw_freqs=(f1y, f1z, f2y, f2z),
        v_star=v_star,
        coarse_kbar=kbar0,
        coarse_qbar=qbar0,
        lm_iterations=lm_res.iterations,
        final_residual=lm_res.cost,
    )
    return EstimateResult(params=params, h_hat=h_hat, stages=diag)
