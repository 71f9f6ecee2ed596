from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavecurve.analysis import cosine_similarity, nmse
from wavecurve.channel import (
    AwcParams,
    awc_steering,
    scenario_channel,
    scenario_to_awc,
    source_to_polar,
    swc_atom_and_jacobian,
    swc_params,
    swc_steering,
    unvec,
    vec,
    wrap_half,
)
from wavecurve.errors import GeometryError
from wavecurve.geometry import fermat_oracle
from wavecurve.optimize import finite_difference_jacobian
from wavecurve.scenarios import default_scene, make_array, mirror_source, sweep_curvature


class TestVecUnvec:
    def test_column_major_2x2(self):
        m = unvec(np.array([1.0, 2.0, 3.0, 4.0]), 2, 2)
        assert np.array_equal(m, np.array([[1.0, 3.0], [2.0, 4.0]]))

    def test_basis_vector_position(self):
        ny, nz = 5, 3
        for k in (0, 4, 7, 14):
            e = np.zeros(ny * nz)
            e[k] = 1.0
            m = unvec(e, ny, nz)
            iy, iz = np.nonzero(m)
            assert (iy[0], iz[0]) == (k % ny, k // ny)

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
    def test_round_trip(self, ny, nz, seed):
        h = np.random.default_rng(seed).standard_normal(ny * nz)
        assert np.array_equal(vec(unvec(h, ny, nz)), h)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            unvec(np.zeros(5), 2, 2)


class TestAwcSteering:
    def test_zero_phase(self):
        c = awc_steering(np.zeros(2), np.zeros((2, 2)), 4, 4)
        assert np.allclose(c, 0.25)

    def test_unit_norm_constant_envelope(self):
        c = awc_steering(np.array([0.1, -0.2]),
                         np.array([[1e-3, 2e-4], [2e-4, 5e-4]]), 16, 8)
        assert abs(np.linalg.norm(c) - 1.0) < 1e-12
        assert np.allclose(np.abs(c), 1.0 / np.sqrt(16 * 8), atol=1e-12)

    def test_corner_phase_64x64(self):
        qbar = np.diag([2e-3, 1e-3])
        c = unvec(awc_steering(np.zeros(2), qbar, 64, 64), 64, 64)
        expected = -2 * np.pi * 0.5 * (2e-3 + 1e-3) * 31.5**2
        # Compare modulo 2*pi at the (+31.5, +31.5) corner element.
        corner = np.angle(c[63, 63])
        assert abs((corner - expected + np.pi) % (2 * np.pi) - np.pi) < 1e-3
        assert abs(expected - (-9.3516)) < 1e-3

    def test_far_field_single_dft_bin(self):
        ny = nz = 16
        c = unvec(awc_steering(np.array([3.0 / ny, -2.0 / nz]),
                               np.zeros((2, 2)), ny, nz), ny, nz)
        power = np.abs(np.fft.fft2(c)) ** 2
        assert power.max() / power.sum() > 1 - 1e-10

    def test_conjugation_symmetry(self):
        kbar = np.array([0.13, -0.07])
        qbar = np.array([[1.5e-3, -4e-4], [-4e-4, 8e-4]])
        a = awc_steering(-kbar, -qbar, 12, 10)
        b = np.conj(awc_steering(kbar, qbar, 12, 10))
        assert np.allclose(a, b, atol=1e-12)

    def test_kbar_wrapped_on_construction(self):
        p = AwcParams(kbar=np.array([0.75, -0.6]), qbar=np.zeros((2, 2)))
        assert np.allclose(p.kbar, [-0.25, 0.4])

    def test_asymmetric_qbar_rejected(self):
        with pytest.raises(GeometryError):
            AwcParams(kbar=np.zeros(2), qbar=np.array([[0.0, 1e-3], [0.0, 0.0]]))


class TestWrapHalf:
    @given(st.floats(-100, 100))
    def test_range_and_congruence(self, x):
        w = float(wrap_half(x))
        assert -0.5 <= w < 0.5
        assert abs((x - w) - round(x - w)) < 1e-9


class TestSwcSteering:
    def make_array(self, ny=16):
        return make_array(center=np.zeros(3), ny=ny, freq_hz=15e9)

    def test_broadside_symmetry(self):
        arr = self.make_array()
        c = unvec(swc_steering(arr.center + 3.0 * arr.normal, arr), arr.ny, arr.nz)
        assert np.allclose(c, c[::-1, ::-1], atol=1e-12)

    def test_far_field_matches_plane_wave(self):
        arr = make_array(center=np.zeros(3), ny=64, freq_hz=15e9)
        d = np.array([1.0, 0.2, 0.1])
        d = d / np.linalg.norm(d)
        c = swc_steering(arr.center + 1e9 * d, arr)
        u = np.array([d @ arr.axis_y, d @ arr.axis_z])
        kbar, _ = swc_params(u, 0.0, arr)
        plane = awc_steering(kbar, np.zeros((2, 2)), arr.ny, arr.nz)
        phase_err = np.abs(np.angle(c * np.conj(plane)))
        assert phase_err.max() < 1e-3

    def test_swc_params_broadside(self):
        arr = self.make_array()
        kbar, qbar = swc_params(np.zeros(2), 1.0 / 4.0, arr)
        assert np.allclose(kbar, 0.0)
        assert np.allclose(qbar, (arr.spacing**2 / arr.wavelength / 4.0) * np.eye(2))

    def test_kbar_negates_source_cosines(self):
        arr = self.make_array()
        u = np.array([0.3, -0.1])
        kbar, _ = swc_params(u, 0.1, arr)
        assert np.allclose(kbar, -(arr.spacing / arr.wavelength) * u)

    def test_source_to_polar_round_trip(self):
        arr = self.make_array()
        src = arr.center + 2.0 * arr.normal + 0.7 * arr.axis_y - 0.4 * arr.axis_z
        u, inv_r = source_to_polar(src, arr)
        r = 1.0 / inv_r
        rebuilt = arr.center + r * (
            np.sqrt(1 - u @ u) * arr.normal + u[0] * arr.axis_y + u[1] * arr.axis_z
        )
        assert np.allclose(rebuilt, src, atol=1e-12)

    def test_atom_jacobian_matches_finite_differences(self, rng):
        arr = self.make_array()
        u = rng.uniform(-0.4, 0.4, size=2)
        inv_r = float(rng.uniform(0.02, 0.3))
        _, analytic = swc_atom_and_jacobian(u, inv_r, arr)

        def resid(theta):
            c, _ = swc_atom_and_jacobian(theta[:2], theta[2], arr)
            return c

        numeric = finite_difference_jacobian(resid, np.array([u[0], u[1], inv_r]))
        scale = np.max(np.abs(numeric), axis=0)
        assert np.max(np.abs(analytic - numeric) / scale[None, :]) < 1e-4


class TestScenarioChannel:
    def test_flat_reflector_equals_mirror_image_swc(self):
        spec = replace(sweep_curvature(0.0), ny=32)
        scene = spec.build()
        h = scenario_channel(scene)
        c = swc_steering(mirror_source(spec), scene.array)
        assert nmse(h, h[0] / c[0] * c) < 1e-9

    def test_isotropic_point_scatterer_limit(self):
        spec = replace(sweep_curvature(0.0), ny=32, curvatures=(1e6, 1e6))
        with pytest.warns(UserWarning):
            scene = spec.build()
        h = scenario_channel(scene)
        c = swc_steering(spec.scatterer_point, scene.array)
        assert cosine_similarity(h, c) > 1 - 1e-6

    def test_gain_modes(self):
        scene = default_scene(ny=16).build()
        p_unit = scenario_to_awc(scene)
        assert abs(p_unit.gain - 1.0) < 1e-12
        geo = replace(scene, gain_mode="geometric-phase")
        p_geo = scenario_to_awc(geo)
        total = np.linalg.norm(scene.scatterer.point - scene.ue) + np.linalg.norm(
            scene.array.center - scene.scatterer.point
        )
        expected = np.exp(-2j * np.pi * total / scene.array.wavelength)
        assert abs(p_geo.gain - expected) < 1e-9

    def test_phase_model_matches_exact_path_lengths(self):
        scene = default_scene(ny=32).build()
        params = scenario_to_awc(scene)
        arr = scene.array
        lam = arr.wavelength
        s0 = fermat_oracle(scene.ue, scene.scatterer, arr.center)
        dy, dz = arr.index_offsets()
        exact = np.empty((arr.ny, arr.nz), dtype=complex)
        for iy in range(0, arr.ny, 4):
            for iz in range(0, arr.nz, 4):
                p = (arr.center + arr.spacing * dy[iy] * arr.axis_y
                     + arr.spacing * dz[iz] * arr.axis_z)
                s = fermat_oracle(scene.ue, scene.scatterer, p)
                exact[iy, iz] = np.exp(-2j * np.pi * (s - s0) / lam)
        model = unvec(
            awc_steering(params.kbar, params.qbar, arr.ny, arr.nz), arr.ny, arr.nz
        )
        sub = np.s_[::4, ::4]
        assert cosine_similarity(exact[sub].ravel(), model[sub].ravel()) > 0.99
