"""Spherical-wavefront baseline: polar-domain dictionary, orthogonal
matching pursuit with a relative-reduction stopping rule, and joint
refinement of the selected paths.

Atom correlations are evaluated per reciprocal-distance ring with a
curvature-compensated zero-padded 2D FFT instead of a materialized
dictionary, so large arrays stay tractable; explicitly materialized atoms
are available for small grids and tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import (
    awc_steering,
    swc_atom_and_jacobian,
    swc_params,
    unvec,
    vec,
)
from .errors import ConfigError
from .geometry import ArrayFrame
from .optimize import LMConfig, levenberg_marquardt
from .sounding import Combiner


@dataclass(frozen=True)
class PathEstimate:
    """One recovered path: directional cosines, reciprocal distance, gain."""

    u: np.ndarray  # (2,)
    inv_r: float
    gain: complex

    @property
    def distance(self) -> float:
        return 1.0 / self.inv_r if self.inv_r > 0 else np.inf

    def source_position(self, array: ArrayFrame) -> np.ndarray | None:
        """3D source point, or None for a far-field path."""
        if self.inv_r <= 0:
            return None
        u = self.u
        x2 = max(0.0, 1.0 - float(u @ u))
        direction = (
            np.sqrt(x2) * array.normal + u[0] * array.axis_y + u[1] * array.axis_z
        )
        return array.center + self.distance * direction


@dataclass
class PolarDictionary:
    """Angle x reciprocal-distance grid of point-source atoms.

    Angle samples are the directional cosines of a zero-padded FFT grid
    (size ay x az), which is what makes the ring-wise FFT matched filter
    exact for the isotropic part of the atom phase.
    """

    array: ArrayFrame
    ay: int
    az: int
    inv_r_grid: np.ndarray  # descending, includes 0 (far field)
    u_max: float = 0.98

    @property
    def u_y(self) -> np.ndarray:
        lam_over_d = self.array.wavelength / self.array.spacing
        return lam_over_d * (np.fft.fftfreq(self.ay))

    @property
    def u_z(self) -> np.ndarray:
        lam_over_d = self.array.wavelength / self.array.spacing
        return lam_over_d * (np.fft.fftfreq(self.az))

    def grid(self) -> list[tuple[float, float, float]]:
        """(u_y, u_z, inv_r) triples of all in-disk atoms."""
        out = []
        for inv_r in self.inv_r_grid:
            for uy in self.u_y:
                for uz in self.u_z:
                    if uy**2 + uz**2 < self.u_max**2:
                        out.append((float(uy), float(uz), float(inv_r)))
        return out

    def atom(self, u: np.ndarray, inv_r: float) -> np.ndarray:
        kbar, qbar = swc_params(np.asarray(u), inv_r, self.array)
        return awc_steering(kbar, qbar, self.array.ny, self.array.nz)

    def atoms(self) -> np.ndarray:
        """Materialized (N, D) atom matrix; small grids only."""
        g = self.grid()
        if len(g) * self.array.n > 20_000_000:
            raise ConfigError("dictionary too large to materialize")
        return np.column_stack([self.atom(np.array([uy, uz]), ir) for uy, uz, ir in g])

    def matched_filter(self, z: np.ndarray) -> tuple[np.ndarray, float, float]:
        """Best (u, inv_r, |corr|) of <atom, z> over the grid.

        z is a length-N channel-domain vector.  Per ring the isotropic part
        of the quadratic phase is compensated and the angular scan collapses
        to one zero-padded inverse FFT; the direction-dependent correction
        term is ignored at this (initialization) stage.
        """
        arr = self.array
        zm = unvec(z, arr.ny, arr.nz)
        d2l = arr.spacing**2 / arr.wavelength
        dy = (np.arange(arr.ny) - (arr.ny - 1) / 2.0)[:, None]
        dz = (np.arange(arr.nz) - (arr.nz - 1) / 2.0)[None, :]
        s2 = dy**2 + dz**2
        uy = self.u_y
        uz = self.u_z
        disk = uy[:, None] ** 2 + uz[None, :] ** 2 < self.u_max**2
        best = (-1.0, None)
        for inv_r in self.inv_r_grid:
            comp = np.exp(1j * np.pi * d2l * inv_r * s2)
            corr = np.fft.fft2(comp * zm, s=(self.ay, self.az))
            mag = np.where(disk, np.abs(corr), -1.0) / np.sqrt(arr.n)
            iy, iz = np.unravel_index(int(np.argmax(mag)), mag.shape)
            if mag[iy, iz] > best[0]:
                best = (float(mag[iy, iz]), (uy[iy], uz[iz], float(inv_r)))
        val, (buy, buz, binv) = best
        return np.array([buy, buz]), binv, val


def build_polar_dictionary(
    array: ArrayFrame,
    angle_counts: tuple[int, int] | None = None,
    n_distance: int = 16,
    r_min: float | None = None,
    r_max: float = 100.0,
) -> PolarDictionary:
    """Default grid: 2*N angle samples per axis (zero-pad factor 2) and
    reciprocal distances uniform from 1/r_min down to 1/r_max plus a
    far-field sample at 0."""
    ay, az = angle_counts if angle_counts is not None else (2 * array.ny, 2 * array.nz)
    if ay < 1 or az < 1 or n_distance < 1:
        raise ConfigError("empty dictionary grid")
    if r_min is None:
        aperture = array.spacing * max(array.ny, array.nz)
        r_min = 1.2 * aperture
    inv_r = np.linspace(1.0 / r_min, 1.0 / r_max, n_distance)
    inv_r = np.concatenate([inv_r, [0.0]])
    return PolarDictionary(array=array, ay=ay, az=az, inv_r_grid=inv_r)


def omp(
    y: np.ndarray,
    combiner: Combiner,
    dictionary: PolarDictionary,
    stop_ratio: float = 0.05,
    max_paths: int = 16,
) -> list[PathEstimate]:
    """Greedy path extraction with joint least-squares gain re-fits.

    Stops when the residual-norm reduction falls below `stop_ratio` times
    the previous iteration's reduction (always keeps at least one path).
    """
    residual = np.asarray(y, dtype=complex).copy()
    basis: list[np.ndarray] = []
    params: list[tuple[np.ndarray, float]] = []
    norms = [float(np.linalg.norm(residual))]
    gains = np.zeros(0, dtype=complex)
    for _ in range(max_paths):
        z = combiner.adjoint(residual)
        u, inv_r, _ = dictionary.matched_filter(z)
        atom = dictionary.atom(u, inv_r)
        basis.append(combiner.apply(atom))
        params.append((u, inv_r))
        b = np.column_stack(basis)
        gains, *_ = np.linalg.lstsq(b, y, rcond=None)
        residual = y - b @ gains
        norms.append(float(np.linalg.norm(residual)))
        if len(norms) >= 3:
            red_prev = norms[-3] - norms[-2]
            red_new = norms[-2] - norms[-1]
            if red_new < stop_ratio * red_prev:
                # The path that triggered the rule added too little; drop it
                # (but always keep at least one path).
                if len(params) > 1:
                    basis.pop()
                    params.pop()
                    b = np.column_stack(basis)
                    gains, *_ = np.linalg.lstsq(b, y, rcond=None)
                break
        if norms[-1] < 1e-12 * max(norms[0], 1.0):
            break
    return [
        PathEstimate(u=u, inv_r=inv_r, gain=complex(g))
        for (u, inv_r), g in zip(params, gains)
    ]


def _paths_to_theta(paths: list[PathEstimate]) -> np.ndarray:
    return np.concatenate([[p.u[0], p.u[1], p.inv_r] for p in paths])


def refine_swc(
    y: np.ndarray,
    combiner: Combiner,
    paths: list[PathEstimate],
    array: ArrayFrame,
    lm: LMConfig | None = None,
    inv_r_max: float = 4.0,
    sweeps: int = 1,
) -> list[PathEstimate]:
    """Per-path Levenberg-Marquardt over (u_y, u_z, 1/r).

    Each path is refined against the residual of the others (its gain
    eliminated in closed form); after every path refinement all gains are
    re-fit jointly by least squares.
    """
    if not paths:
        return []
    lm = lm or LMConfig(max_iters=60)

    def project(theta):
        theta = theta.copy()
        n = np.linalg.norm(theta[:2])
        if n > 0.98:
            theta[:2] *= 0.98 / n
        theta[2] = np.clip(theta[2], 0.0, inv_r_max)
        return theta

    thetas = [np.array([p.u[0], p.u[1], p.inv_r]) for p in paths]
    cols = []
    for th in thetas:
        c, _ = swc_atom_and_jacobian(th[:2], th[2], array)
        cols.append(combiner.apply(c))
    b = np.column_stack(cols)
    gains, *_ = np.linalg.lstsq(b, y, rcond=None)

    for _ in range(sweeps):
        for i in range(len(thetas)):
            others = b @ gains - gains[i] * b[:, i]
            y_i = y - others
            state: dict[str, object] = {}

            def residual(theta):
                c, jc = swc_atom_and_jacobian(theta[:2], theta[2], array)
                wc = combiner.apply(c)
                denom = np.real(np.vdot(wc, wc))
                a = np.vdot(wc, y_i) / denom if denom > 0 else 0.0
                state["wc"], state["jc"], state["a"] = wc, jc, a
                return y_i - a * wc

            def jacobian(theta):
                jc, a = state["jc"], state["a"]
                return np.column_stack(
                    [-a * combiner.apply(jc[:, j]) for j in range(3)]
                )

            res = levenberg_marquardt(
                residual, thetas[i], jacobian=jacobian, config=lm, project=project
            )
            thetas[i] = res.x
            c, _ = swc_atom_and_jacobian(res.x[:2], res.x[2], array)
            b[:, i] = combiner.apply(c)
            gains, *_ = np.linalg.lstsq(b, y, rcond=None)

    return [
        PathEstimate(u=th[:2].copy(), inv_r=float(th[2]), gain=complex(g))
        for th, g in zip(thetas, gains)
    ]


def reconstruct(paths: list[PathEstimate], array: ArrayFrame) -> np.ndarray:
    """Channel vector implied by a set of path estimates."""
    h = np.zeros(array.n, dtype=complex)
    for p in paths:
        kbar, qbar = swc_params(p.u, p.inv_r, array)
        h += p.gain * awc_steering(kbar, qbar, array.ny, array.nz)
    return h
