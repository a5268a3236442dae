import io

import numpy as np
import pytest

import metamervol as mv
from metamervol.spectral import svd_factors

# Frozen before the build from an exact per-segment Simpson quadrature of the
# shipped piecewise-linear Judd-Vos x D65 data over 380-730 nm.
WHITEPOINT_D65_ORACLE = (10023.767661656417, 10626.630092048395, 11064.707053493454)


class TestLoadSpectralTable:
    def test_three_row_readback(self):
        table = mv.load_spectral_table(io.StringIO("l,a\n400,1\n410,2\n420,3"))
        (name, spec), = table.items()
        assert name == "a"
        assert spec.grid == mv.WavelengthGrid(400.0, 420.0, 10.0)
        assert np.array_equal(spec.values, [1.0, 2.0, 3.0])

    def test_header_only_gives_empty(self):
        assert mv.load_spectral_table(io.StringIO("wavelength_nm,a,b")) == {}

    def test_non_monotone_names_row(self):
        with pytest.raises(mv.SpectralDataError, match="row 2"):
            mv.load_spectral_table(io.StringIO("l,a\n400,1\n395,2\n410,3"))

    def test_nan_rejected_with_row(self):
        with pytest.raises(mv.SpectralDataError, match="row 2"):
            mv.load_spectral_table(io.StringIO("l,a\n400,1\n410,nan"))

    def test_malformed_row(self):
        with pytest.raises(mv.SpectralDataError, match="row 1"):
            mv.load_spectral_table(io.StringIO("l,a\n400,huh"))

    def test_comments_and_bytes_stream(self):
        raw = b"# comment\nl,a\n400,1\n# mid comment\n410,2\n"
        table = mv.load_spectral_table(io.BytesIO(raw))
        assert np.array_equal(table["a"].values, [1.0, 2.0])

    def test_nonuniform_spacing_rejected(self):
        with pytest.raises(mv.SpectralDataError, match="uniform"):
            mv.load_spectral_table(io.StringIO("l,a\n400,1\n410,2\n425,3"))


class TestResample:
    def test_midpoint_interpolation(self):
        src = mv.Spectrum(mv.WavelengthGrid(400.0, 410.0, 10.0), [0.0, 1.0])
        out = mv.resample(src, mv.WavelengthGrid(405.0, 410.0, 5.0))
        assert out.values[0] == pytest.approx(0.5)

    def test_identity_on_same_grid(self):
        g = mv.WavelengthGrid(400.0, 420.0, 10.0)
        src = mv.Spectrum(g, [1.0, 4.0, 9.0])
        assert np.array_equal(mv.resample(src, g).values, src.values)

    def test_extrapolation_refused(self):
        src = mv.Spectrum(mv.WavelengthGrid(400.0, 700.0, 5.0), np.ones(61))
        with pytest.raises(mv.RangeError):
            mv.resample(src, mv.WavelengthGrid(380.0, 730.0, 1.0))


class TestMakeColourSystem:
    def test_unit_illuminant_equals_cmfs(self, grid):
        cmfs = mv.load_cmfs()
        ones = mv.Spectrum(grid, np.ones(grid.q))
        sys = mv.make_colour_system(cmfs, ones, grid)
        expected = np.stack([mv.resample(c, grid).values for c in cmfs], axis=1)
        assert np.allclose(sys.spectra, expected, rtol=0, atol=0)

    def test_null_illuminant(self, grid):
        cmfs = mv.load_cmfs()
        zero = mv.Spectrum(grid, np.zeros(grid.q))
        sys = mv.make_colour_system(cmfs, zero, grid)
        assert np.all(sys.spectra == 0.0)

    def test_pointwise_product(self):
        g = mv.WavelengthGrid(400.0, 410.0, 10.0)
        c = mv.Spectrum(g, [2.0, 2.0])
        e = mv.Spectrum(g, [3.0, 3.0])
        sys = mv.make_colour_system([c], e, g)
        assert np.array_equal(sys.spectra[:, 0], [6.0, 6.0])


class TestRespond:
    def test_zero_reflectance(self, phi_d65, grid):
        z = mv.respond(phi_d65, mv.Reflectance(grid, np.zeros(grid.q)))
        assert np.array_equal(z, np.zeros(3))

    def test_homogeneity(self, phi_d65, grid):
        half = mv.respond(phi_d65, mv.Reflectance(grid, np.full(grid.q, 0.5)))
        full = mv.respond(phi_d65, mv.Reflectance(grid, np.ones(grid.q)))
        assert np.allclose(half, 0.5 * full, rtol=1e-14)

    def test_whitepoint_against_quadrature_oracle(self, phi_d65, grid):
        white = mv.respond(phi_d65, mv.Reflectance(grid, np.ones(grid.q)))
        # rectangle rule at 1 nm differs from the exact integral only by
        # discretization; observed relative gap is < 4e-5
        assert np.allclose(white, WHITEPOINT_D65_ORACLE, rtol=2e-4)

    def test_linearity_property(self, phi_d65, grid):
        rng = np.random.default_rng(5)
        for _ in range(20):
            r1 = rng.uniform(0.0, 1.0, grid.q)
            r2 = rng.uniform(0.0, 1.0, grid.q)
            a, b = rng.uniform(0.0, 0.5, 2)
            lhs = mv.respond(phi_d65, mv.Reflectance(grid, a * r1 + b * r2))
            rhs = a * mv.respond(phi_d65, mv.Reflectance(grid, r1)) + b * mv.respond(
                phi_d65, mv.Reflectance(grid, r2)
            )
            assert np.allclose(lhs, rhs, rtol=1e-12)

    def test_grid_mismatch(self, phi_d65):
        other = mv.WavelengthGrid(380.0, 730.0, 5.0)
        with pytest.raises(mv.GridMismatchError):
            mv.respond(phi_d65, mv.Reflectance(other, np.zeros(other.q)))

    def test_refinement_converges_for_smooth_spectra(self):
        # analytic (C-infinity) sensor and illuminant, sampled per grid
        def sensor(lam):
            return np.exp(-(((lam - 550.0) / 60.0) ** 2))

        def illum(lam):
            return 1.0 + 0.5 * np.sin(lam / 40.0)

        resp = []
        for step in (8.0, 4.0, 2.0, 1.0):
            g = mv.WavelengthGrid(380.0, 724.0, step)
            lam = g.wavelengths
            sys = mv.ColourSystem(g, (sensor(lam) * illum(lam))[:, None])
            resp.append(mv.respond(sys, mv.Reflectance(g, np.full(g.q, 0.6))))
        gaps = [np.abs(a - b).max() for a, b in zip(resp, resp[1:])]
        assert gaps[0] > gaps[1] > gaps[2]


class TestStack:
    def test_duplication(self, phi_d65):
        st = mv.stack(phi_d65, phi_d65)
        assert np.array_equal(st.spectra[:, :3], st.spectra[:, 3:])

    def test_block_structure(self, phi_d65, psi_a, grid):
        st = mv.stack(phi_d65, psi_a)
        rng = np.random.default_rng(7)
        r = mv.Reflectance(grid, rng.uniform(0, 1, grid.q))
        combined = mv.respond(st, r)
        assert np.allclose(combined[:3], mv.respond(phi_d65, r), rtol=1e-15)
        assert np.allclose(combined[3:], mv.respond(psi_a, r), rtol=1e-15)

    def test_d65_a_pair_shape(self, phi_d65, psi_a, grid):
        st = mv.stack(phi_d65, psi_a)
        assert st.n_sensors == 6
        assert np.all(st.spectra >= 0.0)
        peaks = grid.wavelengths[np.argmax(st.spectra, axis=0)]
        assert np.all((peaks > 400.0) & (peaks < 700.0))


class TestOrthonormalize:
    def test_orthonormal_and_spanning(self, phi_d65, psi_a):
        st = mv.stack(phi_d65, psi_a)
        u, s = mv.orthonormalize(st)
        gram = u.spectra.T @ u.spectra
        assert np.abs(gram - np.eye(6)).max() <= 1e-10
        # span: projecting the original spectra onto U leaves no residual
        proj = u.spectra @ (u.spectra.T @ st.spectra)
        assert np.abs(proj - st.spectra).max() <= 1e-10 * np.abs(st.spectra).max()
        assert np.all(np.diff(s) <= 0)

    def test_singular_value_ratio_for_d65_a(self, phi_d65, psi_a):
        _, s = mv.orthonormalize(mv.stack(phi_d65, psi_a))
        ratio = s[-1] / s[0]
        assert 1e-2 / 3 <= ratio <= 1e-2 * 3

    def test_orthonormal_input_recovered(self, grid):
        # all singular values tie at 1, so the output may be rotated inside
        # the degenerate subspace; it must still be an isometric re-basis
        rng = np.random.default_rng(11)
        qmat, _ = np.linalg.qr(rng.normal(size=(grid.q, 3)))
        u, s = mv.orthonormalize(mv.ColourSystem(grid, qmat))
        assert np.allclose(s, 1.0)
        mix = u.spectra.T @ qmat
        assert np.abs(mix @ mix.T - np.eye(3)).max() <= 1e-10

    def test_idempotent_up_to_sign_distinct_values(self, grid):
        # orthogonal columns with distinct norms: U is the input's unit
        # columns up to sign, and the sign convention fixes that sign
        rng = np.random.default_rng(12)
        qmat, _ = np.linalg.qr(rng.normal(size=(grid.q, 3)))
        scaled = qmat * np.array([2.0, 1.3, 0.7])
        u, s = mv.orthonormalize(mv.ColourSystem(grid, scaled))
        assert np.allclose(s, [2.0, 1.3, 0.7], rtol=1e-12)
        assert np.allclose(np.abs(u.spectra.T @ qmat), np.eye(3), atol=1e-10)

    def test_rank_deficiency_names_index(self, grid):
        col = np.linspace(1.0, 2.0, grid.q)
        sys = mv.ColourSystem(grid, np.stack([col, col], axis=1))
        with pytest.raises(mv.RankDeficientError) as err:
            mv.orthonormalize(sys)
        assert err.value.index == 1

    def test_svd_factors_reconstruct(self, phi_d65, psi_a):
        st = mv.stack(phi_d65, psi_a)
        u, s, v = svd_factors(st)
        assert np.allclose(u * s @ v.T, st.spectra, atol=1e-10 * s[0])


class TestTypes:
    def test_grid_q(self):
        assert mv.WavelengthGrid(380.0, 730.0, 1.0).q == 351
        assert mv.WavelengthGrid(380.0, 730.0, 0.5).q == 701
        assert mv.WavelengthGrid(380.0, 730.0, 10.0).q == 36

    def test_grid_invalid(self):
        with pytest.raises(ValueError):
            mv.WavelengthGrid(380.0, 730.0, -1.0)
        with pytest.raises(ValueError):
            mv.WavelengthGrid(380.0, 380.5, 1.0)

    def test_reflectance_bounds(self, grid):
        with pytest.raises(ValueError):
            mv.Reflectance(grid, np.full(grid.q, 1.5))

    def test_values_are_frozen(self, grid):
        r = mv.Reflectance(grid, np.zeros(grid.q))
        with pytest.raises(ValueError):
            r.values[0] = 1.0

    def test_spectrum_rejects_nan(self, grid):
        vals = np.zeros(grid.q)
        vals[5] = np.nan
        with pytest.raises(ValueError):
            mv.Spectrum(grid, vals)
