import numpy as np
import pytest

from wavecurve.analysis import nmse
from wavecurve.baseline import (
    PathEstimate,
    build_polar_dictionary,
    omp,
    refine_swc,
    reconstruct,
)
from wavecurve.errors import ConfigError
from wavecurve.scenarios import make_array
from wavecurve.sounding import make_srft_combiner


@pytest.fixture
def small_array():
    return make_array(center=np.zeros(3), ny=16, freq_hz=15e9)


@pytest.fixture
def small_dict(small_array):
    return build_polar_dictionary(small_array, n_distance=8, r_max=50.0)


def on_grid_atom(dictionary, ring=2, iy=1, iz=-2):
    u = np.array([dictionary.u_y[iy], dictionary.u_z[iz]])
    inv_r = float(dictionary.inv_r_grid[ring])
    return u, inv_r, dictionary.atom(u, inv_r)


class TestPolarDictionary:
    def test_grid_includes_far_field(self, small_dict):
        assert small_dict.inv_r_grid[-1] == 0.0
        assert np.all(np.diff(small_dict.inv_r_grid) <= 0)

    def test_grid_stays_in_unit_disk(self, small_dict):
        for uy, uz, _ in small_dict.grid():
            assert uy**2 + uz**2 < small_dict.u_max**2

    def test_atoms_unit_norm(self, small_dict):
        atoms = small_dict.atoms()
        assert np.allclose(np.linalg.norm(atoms, axis=0), 1.0, atol=1e-12)

    def test_empty_grid_rejected(self, small_array):
        with pytest.raises(ConfigError):
            build_polar_dictionary(small_array, n_distance=0)

    def test_matched_filter_recovers_on_grid_atom(self, small_dict):
        u, inv_r, atom = on_grid_atom(small_dict)
        u_hat, inv_r_hat, corr = small_dict.matched_filter(
            np.sqrt(small_dict.array.n) * atom
        )
        assert np.allclose(u_hat, u, atol=1e-12)
        assert inv_r_hat == inv_r
        # Ring-wise scan ignores the anisotropic correction term, so the
        # self-correlation is near (not exactly) one.
        assert corr > 0.98

    def test_matched_filter_beats_other_atoms(self, small_dict, rng):
        _, _, atom = on_grid_atom(small_dict)
        atoms = small_dict.atoms()
        exact = np.abs(atoms.conj().T @ atom)
        # The selected atom dominates the exact correlation profile too.
        assert np.sort(exact)[-2] < 1.0 - 1e-6


class TestOmp:
    def test_single_atom_exact(self, small_dict):
        comb = make_srft_combiner(16, 16, 8, 8, seed=4)
        u, inv_r, atom = on_grid_atom(small_dict)
        gain = 2.0 * np.exp(0.3j)
        paths = omp(comb.apply(gain * atom), comb, small_dict)
        assert len(paths) == 1
        assert np.allclose(paths[0].u, u, atol=1e-12)
        assert paths[0].inv_r == inv_r
        assert abs(paths[0].gain - gain) < 1e-8

    def test_two_far_field_atoms(self, small_dict):
        comb = make_srft_combiner(16, 16, 8, 8, seed=11)
        a1 = small_dict.atom(np.array([small_dict.u_y[2], 0.0]), 0.0)
        a2 = small_dict.atom(np.array([0.0, small_dict.u_z[5]]), 0.0)
        assert abs(np.vdot(a1, a2)) < 1e-10
        h = 1.5 * a1 - 0.8j * a2
        y = comb.apply(h)
        paths = omp(y, comb, small_dict)
        assert len(paths) == 2
        # Angles exact; the near-far-field rings are mutually near-coherent
        # at this aperture, so gains are close and refinement finishes the job.
        got_u = sorted(tuple(p.u) for p in paths)
        want_u = sorted([(small_dict.u_y[2], 0.0), (0.0, small_dict.u_z[5])])
        assert np.allclose(got_u, want_u, atol=1e-12)
        gains = sorted((abs(p.gain) for p in paths))
        assert np.allclose(gains, [0.8, 1.5], atol=0.05)
        refined = refine_swc(y, comb, paths, small_dict.array, sweeps=2)
        assert nmse(reconstruct(refined, small_dict.array), h) < 1e-5

    def test_residual_never_exceeds_input(self, small_dict, rng):
        comb = make_srft_combiner(16, 16, 8, 8, seed=2)
        y = rng.standard_normal(comb.m) + 1j * rng.standard_normal(comb.m)
        paths = omp(y, comb, small_dict)
        assert 1 <= len(paths) <= 16
        resid = y - comb.apply(reconstruct(paths, small_dict.array))
        assert np.linalg.norm(resid) <= np.linalg.norm(y) + 1e-9


class TestRefineSwc:
    def test_truth_is_fixed_point(self, small_array):
        comb = make_srft_combiner(16, 16, 8, 8, seed=6)
        truth = PathEstimate(u=np.array([0.12, -0.07]), inv_r=0.2, gain=1.3 + 0.4j)
        y = comb.apply(reconstruct([truth], small_array))
        refined = refine_swc(y, comb, [truth], small_array)
        assert np.max(np.abs(refined[0].u - truth.u)) < 1e-8
        assert abs(refined[0].inv_r - truth.inv_r) < 1e-8
        assert abs(refined[0].gain - truth.gain) < 1e-6

    def test_off_grid_start_converges(self, small_array):
        comb = make_srft_combiner(16, 16, 8, 8, seed=8)
        truth = PathEstimate(u=np.array([0.21, 0.05]), inv_r=0.13, gain=1.0 + 0j)
        h = reconstruct([truth], small_array)
        start = PathEstimate(
            u=truth.u + np.array([0.01, -0.01]), inv_r=0.18, gain=1.0
        )
        refined = refine_swc(comb.apply(h), comb, [start], small_array)
        assert nmse(reconstruct(refined, small_array), h) < 1e-6


class TestPathEstimate:
    def test_source_position_round_trip(self, small_array):
        p = PathEstimate(u=np.array([0.3, -0.2]), inv_r=0.25, gain=1.0)
        src = p.source_position(small_array)
        assert abs(np.linalg.norm(src - small_array.center) - 4.0) < 1e-12
        offs = src - small_array.center
        assert abs(offs @ small_array.axis_y / 4.0 - 0.3) < 1e-12
        assert abs(offs @ small_array.axis_z / 4.0 - (-0.2)) < 1e-12

    def test_far_field_has_no_position(self, small_array):
        p = PathEstimate(u=np.zeros(2), inv_r=0.0, gain=1.0)
        assert p.source_position(small_array) is None
        assert p.distance == np.inf

    def test_reconstruct_single_path_is_scaled_atom(self, small_dict):
        u, inv_r, atom = on_grid_atom(small_dict)
        h = reconstruct(
            [PathEstimate(u=u, inv_r=inv_r, gain=2.0j)], small_dict.array
        )
        assert np.allclose(h, 2.0j * atom, atol=1e-12)
