import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecurve.errors import CausticError, GeometryError
from wavecurve.geometry import (
    ArrayFrame,
    SurfacePatch,
    WavefrontFrame,
    fermat_oracle,
    make_incident_frame,
    project_to_array,
    propagate,
    reflect,
    surface_point,
    transverse_basis,
    unit,
)

unit_dirs = st.builds(
    lambda a, b: np.array(
        [np.cos(a) * np.cos(b), np.sin(a) * np.cos(b), np.sin(b)]
    ),
    st.floats(0, 2 * np.pi),
    st.floats(-1.4, 1.4),
)

sym2 = st.builds(
    lambda a, b, c: np.array([[a, c], [c, b]]),
    st.floats(-0.5, 0.5),
    st.floats(-0.5, 0.5),
    st.floats(-0.5, 0.5),
)


def frame_from(direction, q):
    u1, u2 = transverse_basis(direction)
    return WavefrontFrame(direction, u1, u2, q)


def flat_mirror(point, normal):
    normal = unit(normal)
    t1 = unit(np.cross(normal, [0.0, 0.0, 1.0]))
    t2 = np.cross(normal, t1)
    return SurfacePatch(point, normal, t1, t2, np.zeros((2, 2)))


class TestIncidentFrame:
    def test_point_source_two_meters(self):
        f = make_incident_frame(np.zeros(3), np.array([2.0, 0.0, 0.0]))
        assert np.allclose(f.direction, [1.0, 0.0, 0.0])
        assert np.allclose(f.Q, 0.5 * np.eye(2))

    def test_far_field_limit(self):
        f = make_incident_frame(np.zeros(3), np.array([1e9, 0.0, 0.0]))
        assert np.max(np.abs(f.Q)) < 2e-9

    def test_isotropic_curvature(self):
        ue = np.array([30.0, 0.0, 1.5])
        pt = np.array([10.0, 4.0, 5.0])
        d = np.linalg.norm(pt - ue)
        f = make_incident_frame(ue, pt)
        assert np.allclose(np.linalg.eigvalsh(f.Q), [1.0 / d, 1.0 / d])

    def test_coincident_points_rejected(self):
        with pytest.raises(GeometryError):
            make_incident_frame(np.zeros(3), np.zeros(3))

    @given(unit_dirs)
    def test_transverse_basis_is_right_handed(self, d):
        u1, u2 = transverse_basis(d)
        d = unit(d)
        assert abs(u1 @ u2) < 1e-10
        assert abs(u1 @ d) < 1e-10
        assert np.allclose(np.cross(u1, u2), d, atol=1e-10)


class TestReflect:
    def test_flat_mirror_keeps_curvature_spectrum(self):
        f = make_incident_frame(np.zeros(3), np.array([3.0, 0.0, 0.0]))
        surf = flat_mirror(np.array([3.0, 0.0, 0.0]), np.array([-1.0, 1.0, 0.0]))
        r = reflect(f, surf)
        assert np.allclose(np.linalg.eigvalsh(r.Q), np.linalg.eigvalsh(f.Q))

    def test_normal_incidence_sphere_mirror_equation(self):
        d, radius = 2.0, 5.0
        f = make_incident_frame(np.zeros(3), np.array([d, 0.0, 0.0]))
        normal = np.array([-1.0, 0.0, 0.0])
        t1 = np.array([0.0, 1.0, 0.0])
        t2 = np.array([0.0, 0.0, -1.0])
        surf = SurfacePatch(
            np.array([d, 0.0, 0.0]), normal, t1, t2, (1.0 / radius) * np.eye(2)
        )
        r = reflect(f, surf)
        expected = 1.0 / d + 2.0 / radius
        assert np.allclose(np.linalg.eigvalsh(r.Q), [expected, expected], atol=1e-12)
        assert np.allclose(r.direction, [-1.0, 0.0, 0.0])

    def test_law_of_reflection_direction(self):
        f = make_incident_frame(np.zeros(3), np.array([2.0, 2.0, 0.0]))
        surf = flat_mirror(np.array([2.0, 2.0, 0.0]), np.array([0.0, -1.0, 0.0]))
        r = reflect(f, surf)
        expected = f.direction - 2 * (f.direction @ surf.normal) * surf.normal
        assert np.allclose(r.direction, expected)

    def test_back_face_rejected(self):
        f = make_incident_frame(np.zeros(3), np.array([2.0, 0.0, 0.0]))
        surf = flat_mirror(np.array([2.0, 0.0, 0.0]), np.array([1.0, 0.1, 0.0]))
        with pytest.raises(GeometryError):
            reflect(f, surf)

    @given(unit_dirs, sym2)
    def test_reflected_triad_orthonormal_and_q_symmetric(self, d, qs):
        d = unit(d)
        target = 5.0 * d
        f = make_incident_frame(np.zeros(3), target)
        normal = unit(-d + 0.3 * np.array([0.0, 0.0, 1.0]))
        if abs(normal @ d) < 0.2:
            return
        if normal @ d >= 0:
            normal = -normal
        t1 = unit(np.cross(normal, [1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9
                  else np.cross(normal, [0.0, 1.0, 0.0]))
        t2 = np.cross(normal, t1)
        surf = SurfacePatch(target, normal, t1, t2, qs)
        r = reflect(f, surf)
        # WavefrontFrame __post_init__ enforces the right-handed orthonormal
        # triad and symmetry; reaching here is the assertion.
        assert np.allclose(r.Q, r.Q.T)


class TestPropagate:
    def test_spherical(self):
        f = frame_from(np.array([1.0, 0.0, 0.0]), 0.5 * np.eye(2))
        out = propagate(f, 3.0)
        assert np.allclose(out.Q, (1.0 / 5.0) * np.eye(2))

    def test_principal_radii_grow(self):
        f = frame_from(np.array([0.0, 1.0, 0.0]), np.diag([1.0 / 2.0, 1.0 / 7.0]))
        out = propagate(f, 3.0)
        assert np.allclose(np.sort(np.linalg.eigvalsh(out.Q)),
                           np.sort([1.0 / 5.0, 1.0 / 10.0]))

    def test_singular_cylindrical(self):
        f = frame_from(np.array([1.0, 0.0, 0.0]), np.diag([0.0, 1.0 / 4.0]))
        out = propagate(f, 6.0)
        assert np.allclose(out.Q, np.diag([0.0, 1.0 / 10.0]), atol=1e-14)

    def test_negative_distance_rejected(self):
        f = frame_from(np.array([1.0, 0.0, 0.0]), np.zeros((2, 2)))
        with pytest.raises(GeometryError):
            propagate(f, -1.0)

    def test_caustic_crossing_rejected(self):
        f = frame_from(np.array([1.0, 0.0, 0.0]), -0.5 * np.eye(2))
        with pytest.raises(CausticError):
            propagate(f, 2.0)

    @given(unit_dirs, sym2, st.floats(0.1, 4.0), st.floats(0.1, 4.0))
    def test_semigroup(self, d, q, s1, s2):
        f = frame_from(unit(d), q)
        try:
            lhs = propagate(propagate(f, s1), s2).Q
            rhs = propagate(f, s1 + s2).Q
        except CausticError:
            return
        assert np.max(np.abs(lhs - rhs)) < 1e-10

    @given(sym2, st.floats(0.1, 4.0))
    def test_eigenvectors_preserved(self, q, s):
        f = frame_from(np.array([1.0, 0.0, 0.0]), q)
        w = np.linalg.eigvalsh(q)
        if w[1] - w[0] < 1e-3:
            return
        try:
            out = propagate(f, s)
        except CausticError:
            return
        _, v0 = np.linalg.eigh(q)
        _, v1 = np.linalg.eigh(out.Q)
        # Same principal directions up to sign/ordering.
        overlap = np.abs(v0.T @ v1)
        assert np.allclose(np.sort(overlap.ravel())[-2:], 1.0, atol=1e-8)


class TestProjectToArray:
    def make_broadside_array(self):
        return ArrayFrame(
            center=np.zeros(3),
            axis_y=np.array([0.0, 1.0, 0.0]),
            axis_z=np.array([0.0, 0.0, 1.0]),
            ny=8,
            nz=8,
            spacing=0.01,
            wavelength=0.02,
        )

    def test_plane_wave(self):
        arr = self.make_broadside_array()
        f = frame_from(np.array([-1.0, 0.0, 0.0]), np.zeros((2, 2)))
        kbar, qbar = project_to_array(f, arr)
        assert np.allclose(kbar, 0.0)
        assert np.allclose(qbar, 0.0)

    def test_isotropic_broadside(self):
        arr = self.make_broadside_array()
        r = 4.0
        f = frame_from(np.array([-1.0, 0.0, 0.0]), (1.0 / r) * np.eye(2))
        kbar, qbar = project_to_array(f, arr)
        assert np.allclose(kbar, 0.0)
        expected = (arr.spacing**2 / (arr.wavelength * r)) * np.eye(2)
        assert np.allclose(qbar, expected)

    def test_oblique_direction_cosines(self):
        arr = self.make_broadside_array()
        d = unit(np.array([-1.0, 0.3, 0.2]))
        f = frame_from(d, np.zeros((2, 2)))
        kbar, _ = project_to_array(f, arr)
        scale = arr.spacing / arr.wavelength
        assert np.allclose(kbar, scale * np.array([d[1], d[2]]))


class TestFermatOracle:
    def test_flat_mirror_equals_specular_image(self):
        ue = np.array([0.0, 2.0, 0.0])
        surf = flat_mirror(np.array([3.0, 0.0, 0.0]), np.array([-0.2, 1.0, 0.0]))
        element = np.array([6.0, 1.5, 0.5])
        v = ue - surf.point
        mirror = surf.point + v - 2 * (v @ surf.normal) * surf.normal
        assert abs(
            fermat_oracle(ue, surf, element) - np.linalg.norm(mirror - element)
        ) < 1e-9

    def test_element_at_reflection_point(self):
        ue = np.array([0.0, 2.0, 0.0])
        surf = flat_mirror(np.array([3.0, 0.0, 0.0]), np.array([-0.2, 1.0, 0.0]))
        assert abs(
            fermat_oracle(ue, surf, surf.point) - np.linalg.norm(ue - surf.point)
        ) < 1e-9

    def test_surface_point_reference(self):
        surf = flat_mirror(np.array([3.0, 1.0, 0.0]), np.array([-1.0, 0.5, 0.0]))
        assert np.allclose(surface_point(surf, np.zeros(2)), surf.point)


class TestFrameInvariants:
    def test_left_handed_triad_rejected(self):
        d = np.array([1.0, 0.0, 0.0])
        u1 = np.array([0.0, 1.0, 0.0])
        u2 = np.array([0.0, 0.0, -1.0])
        with pytest.raises(GeometryError):
            WavefrontFrame(d, u1, u2, np.zeros((2, 2)))

    def test_asymmetric_q_rejected(self):
        d = np.array([1.0, 0.0, 0.0])
        u1, u2 = transverse_basis(d)
        with pytest.raises(GeometryError):
            WavefrontFrame(d, u1, u2, np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_array_frame_validation(self):
        with pytest.raises(GeometryError):
            ArrayFrame(np.zeros(3), np.array([0.0, 1.0, 0.0]),
                       np.array([0.0, 1.0, 0.0]), 4, 4, 0.01, 0.02)
