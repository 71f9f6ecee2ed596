"""Channel vectors with quadratic per-element phase.

The array response of a single reflected path is modeled to second order in
the element offsets: constant-envelope entries whose phase is a linear term
(arrival direction) plus a quadratic form (anisotropic wavefront curvature).
A spherical wavefront is the special case of an isotropic transverse
curvature, so the point-source steering vector used throughout (dictionary
atoms, similarity scans, best-fit searches) is the same quadratic-phase
family with Qbar = (d^2/lambda) * (1/r) * (I - u u^T).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import geometry
from .errors import GeometryError
from .geometry import ArrayFrame, SurfacePatch, Vec3


def wrap_half(x):
    """Wrap into [-0.5, 0.5)."""
    return (np.asarray(x) + 0.5) % 1.0 - 0.5


@dataclass(frozen=True)
class AwcParams:
    """Effective array-domain parameters of one path.

    kbar: linear phase coefficients, cycles per element index (stored
    wrapped into [-0.5, 0.5)); qbar: 2x2 symmetric quadratic coefficients;
    gain: complex scalar multiplying the unit-norm steering vector.
    """

    kbar: np.ndarray
    qbar: np.ndarray
    gain: complex = 1.0 + 0.0j

    def __post_init__(self):
        kbar = wrap_half(np.asarray(self.kbar, dtype=float))
        qbar = np.asarray(self.qbar, dtype=float)
        if kbar.shape != (2,) or qbar.shape != (2, 2):
            raise GeometryError("kbar must be (2,) and qbar (2, 2)")
        if abs(qbar[0, 1] - qbar[1, 0]) > 1e-12:
            raise GeometryError("qbar must be symmetric")
        object.__setattr__(self, "kbar", kbar)
        object.__setattr__(self, "qbar", 0.5 * (qbar + qbar.T))
        object.__setattr__(self, "gain", complex(self.gain))


@dataclass(frozen=True)
class Scenario:
    """One UE -> curved reflector -> BS array propagation scene."""

    ue: Vec3
    array: ArrayFrame
    scatterer: SurfacePatch
    gain_mode: Literal["unit", "geometric-phase"] = "unit"
    gain_phase: float = 0.0  # used by gain_mode="unit"

    def __post_init__(self):
        object.__setattr__(self, "ue", np.asarray(self.ue, dtype=float))
        min_radius = None
        eig = np.abs(np.linalg.eigvalsh(self.scatterer.Qs))
        nonzero = eig[eig > 1e-12]
        if nonzero.size:
            min_radius = 1.0 / nonzero.max()
        if min_radius is not None and min_radius < 10 * self.array.wavelength:
            import warnings

            warnings.warn(
                "scatterer principal radius below 10 wavelengths; "
                "second-order surface model may be inaccurate",
                stacklevel=2,
            )


def vec(c: np.ndarray) -> np.ndarray:
    """Column-major flattening (ny, nz) -> (ny*nz,)."""
    return np.asarray(c).flatten(order="F")


def unvec(h: np.ndarray, ny: int, nz: int) -> np.ndarray:
    """Column-major reshape (ny*nz,) -> (ny, nz)."""
    h = np.asarray(h)
    if h.size != ny * nz:
        raise ValueError(f"length {h.size} does not match {ny}x{nz}")
    return h.reshape((ny, nz), order="F")


def phase_grid(kbar: np.ndarray, qbar: np.ndarray, ny: int, nz: int) -> np.ndarray:
    """Per-element phase argument (cycles): kbar^T n + 1/2 n^T qbar n."""
    dy = np.arange(ny) - (ny - 1) / 2.0
    dz = np.arange(nz) - (nz - 1) / 2.0
    dy = dy[:, None]
    dz = dz[None, :]
    return (
        kbar[0] * dy
        + kbar[1] * dz
        + 0.5 * (qbar[0, 0] * dy**2 + 2.0 * qbar[0, 1] * dy * dz + qbar[1, 1] * dz**2)
    )


def awc_steering(kbar: np.ndarray, qbar: np.ndarray, ny: int, nz: int) -> np.ndarray:
    """Unit-norm steering vector with linear + quadratic phase, vec'd."""
    kbar = np.asarray(kbar, dtype=float)
    qbar = np.asarray(qbar, dtype=float)
    n = ny * nz
    c = np.exp(-2j * np.pi * phase_grid(kbar, qbar, ny, nz)) / np.sqrt(n)
    return vec(c)


def swc_params(u: np.ndarray, inv_r: float, array: ArrayFrame) -> tuple[np.ndarray, np.ndarray]:
    """(kbar, qbar) of a point source seen along directional cosines u at
    reciprocal distance inv_r (inv_r = 0 is the far-field limit).

    kbar carries the propagation direction, which is the negated source
    direction."""
    u = np.asarray(u, dtype=float)
    lam = array.wavelength
    d = array.spacing
    kbar = -(d / lam) * u
    qbar = (d**2 / lam) * inv_r * (np.eye(2) - np.outer(u, u))
    return kbar, qbar


def swc_atom_and_jacobian(
    u: np.ndarray, inv_r: float, array: ArrayFrame
) -> tuple[np.ndarray, np.ndarray]:
    """Point-source atom and its analytic (N, 3) Jacobian w.r.t.
    (u_y, u_z, 1/r)."""
    u = np.asarray(u, dtype=float)
    lam = array.wavelength
    d = array.spacing
    ny, nz = array.ny, array.nz
    dy = (np.arange(ny) - (ny - 1) / 2.0)[:, None]
    dz = (np.arange(nz) - (nz - 1) / 2.0)[None, :]
    lin = u[0] * dy + u[1] * dz
    s2 = dy**2 + dz**2
    phase = -(d / lam) * lin + 0.5 * (d**2 / lam) * inv_r * (s2 - lin**2)
    c = np.exp(-2j * np.pi * phase) / np.sqrt(ny * nz)
    d_uy = -(d / lam) * dy - (d**2 / lam) * inv_r * lin * dy
    d_uz = -(d / lam) * dz - (d**2 / lam) * inv_r * lin * dz
    d_invr = 0.5 * (d**2 / lam) * (s2 - lin**2)
    cv = vec(c)
    jac = np.column_stack(
        [vec(np.broadcast_to(g, (ny, nz))) for g in (d_uy, d_uz, d_invr)]
    )
    return cv, (-2j * np.pi) * jac * cv[:, None]


def source_to_polar(source: Vec3, array: ArrayFrame) -> tuple[np.ndarray, float]:
    """Directional cosines and reciprocal distance of a point source."""
    diff = np.asarray(source, dtype=float) - array.center
    r = np.linalg.norm(diff)
    if r < 1e-12:
        raise GeometryError("source coincides with the array center")
    s_hat = diff / r
    u = np.array([s_hat @ array.axis_y, s_hat @ array.axis_z])
    return u, 1.0 / r


def swc_steering(source: Vec3, array: ArrayFrame) -> np.ndarray:
    """Point-source steering vector (second-order wavefront model)."""
    u, inv_r = source_to_polar(source, array)
    kbar, qbar = swc_params(u, inv_r, array)
    return awc_steering(kbar, qbar, array.ny, array.nz)


def scenario_to_awc(s: Scenario) -> AwcParams:
    """Compose the geometric-optics pipeline into array-domain parameters."""
    incident = geometry.make_incident_frame(s.ue, s.scatterer.point)
    reflected = geometry.reflect(incident, s.scatterer)
    dist = float(np.linalg.norm(s.array.center - s.scatterer.point))
    at_bs = geometry.propagate(reflected, dist)
    kbar, qbar = geometry.project_to_array(at_bs, s.array)
    if s.gain_mode == "geometric-phase":
        total = float(np.linalg.norm(s.scatterer.point - s.ue)) + dist
        phi0 = -2.0 * np.pi * total / s.array.wavelength
    else:
        phi0 = s.gain_phase
    return AwcParams(kbar=kbar, qbar=qbar, gain=np.exp(1j * phi0))


def scenario_channel(s: Scenario) -> np.ndarray:
    """Channel vector h = gain * c(kbar, qbar) of a scenario."""
    p = scenario_to_awc(s)
    return p.gain * awc_steering(p.kbar, p.qbar, s.array.ny, s.array.nz)
