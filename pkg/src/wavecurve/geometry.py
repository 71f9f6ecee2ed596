"""Curvature-matrix algebra of geometric optics.

A propagating wavefront is tracked as a frame: its propagation direction,
a 2D orthonormal transverse basis, and a 2x2 symmetric curvature matrix
expressed in that basis (eigenvalues = principal curvatures, reciprocals of
the principal radii).  The operations here build the incident spherical
frame from a point source, reflect it off a curved surface patch, propagate
it in free space, and project it onto planar-array index coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CausticError, GeometryError, OracleError, SingularReflectionError

Vec3 = np.ndarray  # shape (3,), float64

_Z_GLOBAL = np.array([0.0, 0.0, 1.0])
_X_GLOBAL = np.array([1.0, 0.0, 0.0])


def unit(v: Vec3) -> Vec3:
    n = np.linalg.norm(v)
    if n < 1e-300:
        raise GeometryError("cannot normalize a zero vector")
    return np.asarray(v, dtype=float) / n


def _check_symmetric(q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (2, 2) or abs(q[0, 1] - q[1, 0]) > tol:
        raise GeometryError(f"curvature matrix must be 2x2 symmetric, got {q!r}")
    return 0.5 * (q + q.T)


@dataclass(frozen=True)
class WavefrontFrame:
    """Propagation direction, transverse basis (u1, u2) and curvature matrix Q.

    (u1, u2, direction) form a right-handed orthonormal triad; Q is expressed
    in the (u1, u2) basis, units 1/m.
    """

    direction: Vec3
    u1: Vec3
    u2: Vec3
    Q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "direction", np.asarray(self.direction, dtype=float))
        object.__setattr__(self, "u1", np.asarray(self.u1, dtype=float))
        object.__setattr__(self, "u2", np.asarray(self.u2, dtype=float))
        object.__setattr__(self, "Q", _check_symmetric(self.Q))
        for v in (self.direction, self.u1, self.u2):
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise GeometryError("frame vectors must be unit length")
        if (
            abs(self.u1 @ self.u2) > 1e-10
            or abs(self.u1 @ self.direction) > 1e-10
            or abs(self.u2 @ self.direction) > 1e-10
        ):
            raise GeometryError("frame vectors must be mutually orthogonal")
        if np.linalg.norm(np.cross(self.u1, self.u2) - self.direction) > 1e-10:
            raise GeometryError("(u1, u2, direction) must be right-handed")

    @property
    def basis(self) -> np.ndarray:
        """3x2 matrix [u1, u2]."""
        return np.column_stack([self.u1, self.u2])


@dataclass(frozen=True)
class SurfacePatch:
    """Second-order reflecting surface patch.

    Local height above the tangent plane: h = -1/2 x^T Qs x with x the
    coordinates in the (s1, s2) tangent basis and h measured along `normal`.
    """

    point: Vec3
    normal: Vec3
    s1: Vec3
    s2: Vec3
    Qs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        object.__setattr__(self, "s1", np.asarray(self.s1, dtype=float))
        object.__setattr__(self, "s2", np.asarray(self.s2, dtype=float))
        object.__setattr__(self, "Qs", _check_symmetric(self.Qs))
        for v in (self.normal, self.s1, self.s2):
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise GeometryError("surface frame vectors must be unit length")
        if abs(self.s1 @ self.normal) > 1e-10 or abs(self.s2 @ self.normal) > 1e-10:
            raise GeometryError("tangent basis must be orthogonal to the normal")

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.s1, self.s2])


@dataclass(frozen=True)
class ArrayFrame:
    """Uniform planar array: center, in-plane axes, grid size and spacing."""

    center: Vec3
    axis_y: Vec3
    axis_z: Vec3
    ny: int
    nz: int
    spacing: float
    wavelength: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "axis_y", np.asarray(self.axis_y, dtype=float))
        object.__setattr__(self, "axis_z", np.asarray(self.axis_z, dtype=float))
        if self.ny < 1 or self.nz < 1:
            raise GeometryError("array dimensions must be positive")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise GeometryError("spacing and wavelength must be positive")
        for v in (self.axis_y, self.axis_z):
            if abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise GeometryError("array axes must be unit length")
        if abs(self.axis_y @ self.axis_z) > 1e-10:
            raise GeometryError("array axes must be orthogonal")

    @property
    def n(self) -> int:
        return self.ny * self.nz

    @property
    def normal(self) -> Vec3:
        return np.cross(self.axis_y, self.axis_z)

    def index_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """Zero-centered element indices along each axis."""
        dy = np.arange(self.ny) - (self.ny - 1) / 2.0
        dz = np.arange(self.nz) - (self.nz - 1) / 2.0
        return dy, dz

    def element_positions(self) -> np.ndarray:
        """(ny, nz, 3) array of element positions in global coordinates."""
        dy, dz = self.index_offsets()
        return (
            self.center[None, None, :]
            + self.spacing * dy[:, None, None] * self.axis_y[None, None, :]
            + self.spacing * dz[None, :, None] * self.axis_z[None, None, :]
        )


def transverse_basis(direction: Vec3) -> tuple[Vec3, Vec3]:
    """Deterministic orthonormal completion of a propagation direction.

    u1 = unit(direction x z_global), falling back to the global x axis when
    the direction is (anti)parallel to z; u2 = direction x u1.
    """
    direction = unit(direction)
    c = np.cross(direction, _Z_GLOBAL)
    if np.linalg.norm(c) < 1e-6:
        u1 = _X_GLOBAL - (_X_GLOBAL @ direction) * direction
        u1 = unit(u1)
    else:
        u1 = unit(c)
    u2 = np.cross(direction, u1)
    return u1, u2


def make_incident_frame(source: Vec3, reflection_point: Vec3) -> WavefrontFrame:
    """Spherical wavefront emitted by a point source, evaluated at a point."""
    source = np.asarray(source, dtype=float)
    reflection_point = np.asarray(reflection_point, dtype=float)
    diff = reflection_point - source
    d = np.linalg.norm(diff)
    if d < 1e-12:
        raise GeometryError("source and reflection point coincide")
    direction = diff / d
    u1, u2 = transverse_basis(direction)
    return WavefrontFrame(direction, u1, u2, (1.0 / d) * np.eye(2))


def reflect(incident: WavefrontFrame, surface: SurfacePatch) -> WavefrontFrame:
    """Reflect a wavefront frame off a curved surface patch.

    The reflected curvature is Qi + 2 Theta^-T Qs Theta^-1 cos(theta_i),
    where Theta aligns the incident transverse basis with the surface tangent
    basis; the reflected direction and basis follow the law of reflection
    (Householder reflection about the surface normal).  The second reflected
    basis vector is flipped to keep the output triad right-handed, with the
    corresponding sign conjugation applied to Q.
    """
    n = surface.normal
    di = incident.direction
    cos_i = float(n @ di)
    if cos_i >= 0:
        raise GeometryError("wave must hit the front face of the surface")
    cos_i = abs(cos_i)

    theta = incident.basis.T @ surface.basis
    if np.linalg.cond(theta) > 1e12:
        raise SingularReflectionError("grazing incidence: basis alignment singular")
    theta_inv = np.linalg.inv(theta)
    q_r = incident.Q + 2.0 * cos_i * theta_inv.T @ surface.Qs @ theta_inv

    d_r = di - 2.0 * (n @ di) * n
    u1 = incident.u1 - 2.0 * (n @ incident.u1) * n
    # Householder reflection flips handedness; restore it by negating u2.
    u2 = np.cross(d_r, u1)
    flip = np.diag([1.0, -1.0])
    q_r = flip @ q_r @ flip
    return WavefrontFrame(d_r, u1, u2, q_r)


def propagate(frame: WavefrontFrame, s: float) -> WavefrontFrame:
    """Advance a wavefront a distance s: each principal radius grows by s.

    Uses the factored update Q' = Q (I + s Q)^-1, which stays well defined
    for singular (cylindrical or planar) Q.
    """
    if s < 0:
        raise GeometryError("propagation distance must be nonnegative")
    eig = np.linalg.eigvalsh(frame.Q)
    if np.min(1.0 + s * eig) <= 1e-14:
        raise CausticError(f"propagation by {s} m crosses a caustic")
    m = np.eye(2) + s * frame.Q
    q_new = frame.Q @ np.linalg.inv(m)
    q_new = 0.5 * (q_new + q_new.T)
    return WavefrontFrame(frame.direction, frame.u1, frame.u2, q_new)


def project_to_array(frame_at_bs: WavefrontFrame, array: ArrayFrame) -> tuple[np.ndarray, np.ndarray]:
    """Project a wavefront at the array center onto array-index coordinates.

    Returns (kbar, Qbar): the effective linear and quadratic phase
    coefficients in cycles per element index (and per squared index).
    """
    a = np.column_stack([array.axis_y, array.axis_z])  # 3x2
    u_r = frame_at_bs.basis  # 3x2
    h3 = u_r @ frame_at_bs.Q @ u_r.T  # curvature as a 3x3 quadratic form
    kbar = (array.spacing / array.wavelength) * (a.T @ frame_at_bs.direction)
    qbar = (array.spacing**2 / array.wavelength) * (a.T @ h3 @ a)
    qbar = 0.5 * (qbar + qbar.T)
    return kbar, qbar


def surface_point(surface: SurfacePatch, x: np.ndarray) -> Vec3:
    """Point on the quadric surface at tangent coordinates x (2,)."""
    h = -0.5 * float(x @ surface.Qs @ x)
    return surface.point + surface.basis @ x + h * surface.normal


def fermat_oracle(
    ue: Vec3,
    surface: SurfacePatch,
    element: Vec3,
    max_iters: int = 100,
    grad_tol: float = 1e-12,
) -> float:
    """Exact reflected path length UE -> surface -> element.

    Minimizes |ue - q(x)| + |q(x) - element| over the 2D surface
    parameterization by damped Newton (numeric Hessian of the analytic
    gradient), seeded at the patch reference point.  Test/validation only.
    """
    ue = np.asarray(ue, dtype=float)
    element = np.asarray(element, dtype=float)

    def value_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
        q = surface_point(surface, x)
        jac = surface.basis - np.outer(surface.normal, surface.Qs @ x)  # 3x2
        v1 = q - ue
        v2 = q - element
        r1 = np.linalg.norm(v1)
        r2 = np.linalg.norm(v2)
        if r1 < 1e-12 or r2 < 1e-12:
            return r1 + r2, np.zeros(2)
        g = jac.T @ (v1 / r1 + v2 / r2)
        return r1 + r2, g

    x = np.zeros(2)
    f, g = value_grad(x)
    for _ in range(max_iters):
        if np.linalg.norm(g) < grad_tol:
            return f
        # Numeric Hessian of the analytic gradient.
        eps = 1e-7
        hess = np.empty((2, 2))
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = eps
            _, gp = value_grad(x + dx)
            _, gm = value_grad(x - dx)
            hess[:, j] = (gp - gm) / (2 * eps)
        hess = 0.5 * (hess + hess.T)
        lam = 0.0
        for _ in range(60):
            try:
                step = np.linalg.solve(hess + lam * np.eye(2), -g)
            except np.linalg.LinAlgError:
                lam = max(10 * lam, 1e-12)
                continue
            f_new, g_new = value_grad(x + step)
            if f_new <= f + 1e-15:
                x = x + step
                f, g = f_new, g_new
                break
            lam = max(10 * lam, 1e-12)
        else:
            raise OracleError("damped Newton failed to make progress")
    if np.linalg.norm(g) < 1e-8:
        return f
    raise OracleError("Fermat path minimization did not converge")
