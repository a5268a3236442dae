import numpy as np
import pytest

import metamervol as mv
from metamervol import lp
from metamervol.spectral import svd_factors

from conftest import toy_system


def face_offsets(hull):
    return np.einsum("fj,fj->f", hull.face_normals, hull.vertices[hull.faces[:, 0]])


def toy_problem(seed=0, grey=0.5):
    phi = toy_system(q=12, n=3, seed=seed)
    psi = toy_system(q=12, n=3, seed=seed + 50)
    return mv.grey_problem(phi, psi, grey)


class TestProblem:
    def test_grid_mismatch(self, phi_d65):
        g = mv.WavelengthGrid(380.0, 730.0, 5.0)
        psi = mv.colour_system("A", g)
        with pytest.raises(ValueError):
            mv.MismatchProblem(phi_d65, psi, np.zeros(3))

    def test_grey_problem_target(self, phi_d65, psi_a, grid):
        prob = mv.grey_problem(phi_d65, psi_a, 0.5)
        expected = mv.respond(phi_d65, mv.Reflectance(grid, np.full(grid.q, 0.5)))
        assert np.allclose(prob.z0, expected, rtol=1e-15)


class TestMmvLp:
    def test_contains_own_grey_response(self, problem_d65_a, psi_a, grid):
        res = mv.mmv_lp(problem_d65_a, mv.sample_sphere(6, 300, seed=1))
        grey_psi = mv.respond(psi_a, mv.Reflectance(grid, np.full(grid.q, 0.5)))
        slack = face_offsets(res.hull) - res.hull.face_normals @ grey_psi
        assert slack.min() >= -1e-9 * np.abs(grey_psi).max()

    def test_feasibility_of_every_spectrum(self, problem_d65_a):
        res = mv.mmv_lp(problem_d65_a, mv.sample_sphere(6, 200, seed=2))
        eps = 1e-8 * np.abs(problem_d65_a.z0).max()
        eq = problem_d65_a.eq_matrix()
        for r in res.spectra:
            assert np.abs(eq.T @ r.values - problem_d65_a.z0).max() <= eps
            assert r.values.min() >= 0.0 and r.values.max() <= 1.0

    def test_points_follow_direction_order(self, problem_d65_a, grid):
        dirs = mv.sample_sphere(6, 150, seed=3)
        res = mv.mmv_lp(problem_d65_a, dirs)
        psi = problem_d65_a.psi
        for i in (0, 57, 149):
            z = grid.delta * (res.spectra[i].values @ psi.spectra)
            assert np.allclose(z, res.points[i], atol=1e-12 * np.abs(z).max())

    def test_extremality_original_variant(self, problem_d65_a):
        dirs = mv.sample_sphere(6, 250, seed=4)
        res = mv.mmv_lp(problem_d65_a, dirs, use_orthonormal=False)
        k_psi = dirs.vectors[:, 3:]
        proj = k_psi @ res.points.T
        own = np.diag(proj)
        assert (proj.max(axis=1) - own).max() <= 1e-7 * np.abs(own).max()

    def test_extremality_orthonormal_variant(self, problem_d65_a):
        dirs = mv.sample_sphere(6, 250, seed=5)
        res = mv.mmv_lp(problem_d65_a, dirs, use_orthonormal=True)
        stacked = mv.stack(problem_d65_a.phi, problem_d65_a.psi)
        _, s, v = svd_factors(stacked)
        eff = dirs.vectors @ (v / s).T
        k_psi = eff[:, 3:]
        proj = k_psi @ res.points.T
        own = np.diag(proj)
        assert (proj.max(axis=1) - own).max() <= 1e-7 * np.abs(own).max()

    def test_volume_monotone_in_nested_sets(self, problem_d65_a):
        dirs = mv.sample_sphere(6, 800, seed=6)
        v1 = mv.mmv_lp(problem_d65_a, dirs.prefix(200)).volume
        v2 = mv.mmv_lp(problem_d65_a, dirs.prefix(800)).volume
        assert v1 <= v2 + 1e-9 * v2

    def test_infeasible_target(self, phi_d65, psi_a, grid):
        white = mv.respond(phi_d65, mv.Reflectance(grid, np.ones(grid.q)))
        prob = mv.MismatchProblem(phi_d65, psi_a, 2.0 * white)
        with pytest.raises(mv.InfeasibleTargetError):
            mv.mmv_lp(prob, mv.sample_sphere(6, 10, seed=7))

    def test_direction_dim_checked(self, problem_d65_a):
        with pytest.raises(ValueError):
            mv.mmv_lp(problem_d65_a, mv.sample_sphere(3, 10, seed=8))


class TestMmvHalfspace:
    def test_contains_lp_result(self, problem_d65_a):
        dirs = mv.sample_sphere(6, 4000, seed=9)
        res_lp = mv.mmv_lp(problem_d65_a, dirs.prefix(500))
        res_hs = mv.mmv_halfspace(problem_d65_a, dirs)
        assert res_lp.volume <= res_hs.volume + 1e-9 * res_hs.volume
        # every LP point inside the half-space polytope
        slack = face_offsets(res_hs.hull) - res_hs.hull.face_normals @ res_lp.points.T
        assert slack.min() >= -1e-7 * np.abs(res_lp.points).max()

    def test_volume_decreases_in_nested_sets(self, problem_d65_a):
        dirs = mv.sample_sphere(6, 20_000, seed=10)
        v_small = mv.mmv_halfspace(problem_d65_a, dirs.prefix(2000)).volume
        v_big = mv.mmv_halfspace(problem_d65_a, dirs).volume
        assert v_big <= v_small + 1e-9 * v_small

    def test_midpoint_convexity(self, problem_d65_a):
        dirs = mv.sample_sphere(6, 2000, seed=11)
        res_lp = mv.mmv_lp(problem_d65_a, dirs.prefix(300))
        res_hs = mv.mmv_halfspace(problem_d65_a, dirs)
        rng = np.random.default_rng(12)
        idx = rng.integers(0, len(res_lp.points), size=(50, 2))
        mids = 0.5 * (res_lp.points[idx[:, 0]] + res_lp.points[idx[:, 1]])
        slack = face_offsets(res_hs.hull) - res_hs.hull.face_normals @ mids.T
        assert slack.min() >= -1e-7 * np.abs(mids).max()

    def test_no_spectra_side(self, problem_d65_a):
        res = mv.mmv_halfspace(problem_d65_a, mv.sample_sphere(6, 2000, seed=13))
        assert res.spectra is None
        with pytest.raises(ValueError):
            mv.classify_transitions(res)

    def test_degenerate_slice_at_white(self, phi_d65, psi_a, grid):
        white = mv.respond(phi_d65, mv.Reflectance(grid, np.ones(grid.q)))
        prob = mv.MismatchProblem(phi_d65, psi_a, white)
        with pytest.raises((mv.DegenerateSliceError, mv.InfeasibleTargetError)):
            mv.mmv_halfspace(prob, mv.sample_sphere(6, 500, seed=14))

    def test_monte_carlo_membership_oracle(self):
        problem = toy_problem(seed=3)
        res_hs = mv.mmv_halfspace(problem, mv.sample_sphere(6, 100_000, seed=15))
        res_lp = mv.mmv_lp(problem, mv.sample_sphere(6, 1500, seed=16))

        stacked = mv.stack(problem.phi, problem.psi)
        eq6 = problem.grid.delta * stacked.spectra
        lo = res_hs.hull.vertices.min(axis=0)
        hi = res_hs.hull.vertices.max(axis=0)
        pad = 0.02 * (hi - lo)
        lo, hi = lo - pad, hi + pad
        box_vol = float(np.prod(hi - lo))

        rng = np.random.default_rng(17)
        n = 1500
        hits = 0
        for z_psi in rng.uniform(lo, hi, size=(n, 3)):
            target = np.concatenate([problem.z0, z_psi])
            if lp.feasible_point(lp.BoxedLp(np.zeros(problem.grid.q), eq6, target)) is not None:
                hits += 1
        mc_vol = box_vol * hits / n
        sigma = box_vol * np.sqrt(hits) / n
        # inscribed hull <= true volume (MC) <= sliced polytope, within MC noise
        assert res_lp.volume <= mc_vol + 3 * sigma
        assert mc_vol <= res_hs.volume + 3 * sigma
        assert abs(mc_vol - res_hs.volume) <= 4 * sigma + 0.05 * res_hs.volume


class TestClassifyTransitions:
    def test_histogram_sums_to_samples(self, problem_d65_a):
        res = mv.mmv_lp(problem_d65_a, mv.sample_sphere(6, 120, seed=18))
        hist = mv.classify_transitions(res)
        assert sum(hist.values()) == 120
        assert all(k >= 0 for k in hist)
