"""Tests for the spectral core: transforms, multipliers, projections, snapshots."""
import numpy as np
import pytest

from conftest import bruteforce_leray, bruteforce_multiplier, quad_l2, random_field
from fstokes.spectral import (
    Grid,
    MultiplierSpec,
    RealField,
    SpectralField,
    apply_multiplier,
    dealias,
    forward_transform,
    fractional_laplacian,
    inverse_transform,
    leray_project,
    lp_norm,
    partial_derivative,
    read_snapshot,
    write_snapshot,
)


class TestGrid:
    def test_wavevectors_are_integers(self):
        grid = Grid(16)
        assert grid.k.shape == (2, 16, 16)
        assert np.all(grid.k == np.round(grid.k))
        assert grid.k.min() == -8 and grid.k.max() == 7

    def test_spacing(self):
        grid = Grid(32, d=3)
        assert grid.h == pytest.approx(2 * np.pi / 32)
        assert grid.shape == (32, 32, 32)

    @pytest.mark.parametrize("n", [4, 6, 12, 17])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError, match="power of two"):
            Grid(n)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError, match="d must be 2 or 3"):
            Grid(16, d=4)

    def test_field_shape_checked(self):
        grid = Grid(16)
        with pytest.raises(ValueError, match="shape"):
            RealField(grid, np.zeros((16, 8)))


class TestTransform:
    def test_constant_is_dc_only(self):
        grid = Grid(16)
        hat = forward_transform(RealField(grid, np.full(grid.shape, 3.25)))
        assert hat.coeffs[0, 0] == pytest.approx(3.25)
        off = hat.coeffs.copy()
        off[0, 0] = 0.0
        assert np.max(np.abs(off)) < 1e-13

    def test_single_sine_mode(self):
        # sin(x1) = -(i/2) e^{i x1} + (i/2) e^{-i x1}
        grid = Grid(16)
        hat = forward_transform(RealField(grid, np.sin(grid.x[0])))
        assert hat.coeffs[1, 0] == pytest.approx(-0.5j, abs=1e-13)
        assert hat.coeffs[-1, 0] == pytest.approx(0.5j, abs=1e-13)
        rest = hat.coeffs.copy()
        rest[1, 0] = rest[-1, 0] = 0.0
        assert np.max(np.abs(rest)) < 1e-13

    @pytest.mark.parametrize("d", [2, 3])
    def test_round_trip(self, d):
        grid = Grid(16, d=d)
        rng = np.random.default_rng(7)
        f = random_field(grid, rng)
        back = inverse_transform(forward_transform(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values))

    def test_parseval(self):
        grid = Grid(32)
        rng = np.random.default_rng(11)
        for _ in range(5):
            f = random_field(grid, rng)
            hat = forward_transform(f)
            spectral = np.sqrt((2 * np.pi) ** grid.d * np.sum(np.abs(hat.coeffs) ** 2))
            physical = quad_l2(f.values, grid.h)
            assert abs(spectral - physical) < 1e-12 * physical

    def test_hermitian_symmetry(self):
        grid = Grid(16)
        rng = np.random.default_rng(3)
        hat = forward_transform(random_field(grid, rng))
        flipped = hat.coeffs[tuple(slice(None, None, -1) for _ in range(grid.d))]
        flipped = np.roll(flipped, 1, axis=tuple(range(grid.d)))
        assert np.max(np.abs(hat.coeffs - np.conj(flipped))) < 1e-12

    def test_rejects_non_finite(self):
        grid = Grid(16)
        values = np.zeros(grid.shape)
        values[3, 4] = np.nan
        with pytest.raises(ValueError, match=r"\(3, 4\)"):
            forward_transform(RealField(grid, values))


class TestApplyMultiplier:
    def test_order_zero_is_identity(self):
        grid = Grid(16)
        rng = np.random.default_rng(5)
        f = random_field(grid, rng)
        out = fractional_laplacian(f, 0.0)
        assert np.max(np.abs(out.values - f.values)) < 1e-12

    def test_single_mode_scaling(self):
        # |k|^2 = 25 at k = (3, 4)
        grid = Grid(16)
        f = RealField(grid, np.cos(3 * grid.x[0] + 4 * grid.x[1]))
        out = fractional_laplacian(f, 2.0)
        assert np.max(np.abs(out.values - 25.0 * f.values)) < 1e-11

    def test_composition_removes_mean(self):
        # (-Lap)^{-1/2} after (-Lap)^{1/2} with the zero rule kills only k = 0
        grid = Grid(16)
        rng = np.random.default_rng(9)
        f = random_field(grid, rng)
        out = fractional_laplacian(fractional_laplacian(f, 1.0), -1.0)
        expected = f.values - f.values.mean()
        assert np.max(np.abs(out.values - expected)) < 1e-12

    def test_explicit_zero_mode_value(self):
        grid = Grid(16)
        f = RealField(grid, np.full(grid.shape, 2.0))
        spec = MultiplierSpec(lambda k: np.sum(k**2, axis=0), zero_mode_rule=7.0)
        out = inverse_transform(apply_multiplier(spec, forward_transform(f)))
        assert np.max(np.abs(out.values - 14.0)) < 1e-12

    def test_non_finite_symbol_names_wavevector(self):
        grid = Grid(16)
        f = random_field(grid, np.random.default_rng(1))

        def bad(k):
            table = np.ones(k.shape[1:])
            table[2, 3] = np.inf
            return table

        with pytest.raises(ValueError, match=r"k = \(2, 3\)"):
            apply_multiplier(MultiplierSpec(bad), forward_transform(f))

    def test_composition_pairs_commute_with_product(self):
        grid = Grid(16)
        rng = np.random.default_rng(23)
        f = forward_transform(random_field(grid, rng, zero_mean=True))

        def leray_entry(k):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(np.sum(k**2, axis=0) > 0,
                                1.0 - k[0] ** 2 / np.sum(k**2, axis=0), 1.0)

        symbols = [
            lambda k: np.sum(k**2, axis=0) ** 0.35,
            lambda k: 1j * k[1],
            leray_entry,
        ]
        for a in symbols:
            for b in symbols:
                two_step = apply_multiplier(
                    MultiplierSpec(a), apply_multiplier(MultiplierSpec(b), f)
                )
                combined = apply_multiplier(
                    MultiplierSpec(lambda k: a(k) * b(k)), f
                )
                scale = np.max(np.abs(f.coeffs))
                assert np.max(np.abs(two_step.coeffs - combined.coeffs)) < 1e-12 * scale


class TestFractionalLaplacian:
    @pytest.mark.parametrize("s", [-1.0, -0.5, 0.0, 0.7, 2.0])
    def test_unit_mode_fixed(self, s):
        grid = Grid(16)
        f = RealField(grid, np.sin(grid.x[0]))
        out = fractional_laplacian(f, s)
        assert np.max(np.abs(out.values - f.values)) < 1e-12

    def test_mode_two(self):
        grid = Grid(16)
        f = RealField(grid, np.cos(2 * grid.x[1]))
        out = fractional_laplacian(f, 1.0)
        assert np.max(np.abs(out.values - 2.0 * f.values)) < 1e-12

    @pytest.mark.parametrize("s", [0.7, -1.3])
    def test_matches_bruteforce_dft(self, s):
        grid = Grid(16)
        rng = np.random.default_rng(17)
        f = random_field(grid, rng, zero_mean=True)
        out = fractional_laplacian(f, s)

        def symbol(kvec):
            ksq = np.dot(kvec, kvec)
            return ksq ** (s / 2.0) if ksq > 0 else 0.0

        expected = bruteforce_multiplier(f.values, symbol)
        scale = np.max(np.abs(expected))
        assert np.max(np.abs(out.values - expected)) < 1e-12 * scale

    def test_matches_bruteforce_dft_3d(self):
        grid = Grid(8, d=3)
        rng = np.random.default_rng(19)
        f = random_field(grid, rng, zero_mean=True)
        out = fractional_laplacian(f, 0.9)

        def symbol(kvec):
            ksq = np.dot(kvec, kvec)
            return ksq**0.45 if ksq > 0 else 0.0

        expected = bruteforce_multiplier(f.values, symbol)
        scale = np.max(np.abs(expected))
        assert np.max(np.abs(out.values - expected)) < 1e-12 * scale

    def test_negative_order_zeroes_mean(self):
        grid = Grid(16)
        rng = np.random.default_rng(21)
        f = random_field(grid, rng)
        out = fractional_laplacian(f, -0.8)
        assert abs(out.values.mean()) < 1e-13

    def test_order_zero_keeps_mean(self):
        grid = Grid(16)
        f = RealField(grid, np.full(grid.shape, 1.5))
        out = fractional_laplacian(f, 0.0)
        assert out.values.mean() == pytest.approx(1.5)

    def test_warns_outside_working_range(self):
        grid = Grid(16)
        f = random_field(grid, np.random.default_rng(2))
        with pytest.warns(UserWarning, match="outside the working range"):
            fractional_laplacian(f, 3.5)


class TestLeray:
    def test_annihilates_gradients(self):
        grid = Grid(32)
        phi = np.sin(grid.x[0]) * np.sin(grid.x[1])
        u = [partial_derivative(RealField(grid, phi), i) for i in range(2)]
        out = leray_project(u)
        for comp in out:
            assert np.max(np.abs(comp.values)) < 1e-12

    def test_fixes_divergence_free_fields(self):
        grid = Grid(32)
        psi = RealField(grid, np.sin(grid.x[0]) * np.cos(2 * grid.x[1]))
        u = [
            partial_derivative(psi, 1) * -1.0,
            partial_derivative(psi, 0),
        ]
        out = leray_project(u)
        for got, want in zip(out, u):
            assert np.max(np.abs(got.values - want.values)) < 1e-12

    def test_idempotent(self):
        grid = Grid(32)
        rng = np.random.default_rng(29)
        u = [random_field(grid, rng) for _ in range(2)]
        once = leray_project(u)
        twice = leray_project(once)
        for a, b in zip(once, twice):
            assert np.max(np.abs(a.values - b.values)) < 1e-12

    @pytest.mark.parametrize("d", [2, 3])
    def test_output_divergence_free(self, d):
        grid = Grid(16, d=d)
        rng = np.random.default_rng(31)
        u = leray_project([random_field(grid, rng) for _ in range(d)])
        hats = [forward_transform(c).coeffs for c in u]
        div = sum(grid.k[i] * hats[i] for i in range(d))
        scale = max(np.max(np.abs(h)) for h in hats)
        assert np.max(np.abs(div)) < 1e-12 * scale

    def test_orthogonality(self):
        grid = Grid(32)
        rng = np.random.default_rng(37)
        u = [random_field(grid, rng) for _ in range(2)]
        pu = leray_project(u)
        inner = sum(
            grid.h**2 * np.sum(p.values * (orig.values - p.values))
            for p, orig in zip(pu, u)
        )
        norm2 = sum(grid.h**2 * np.sum(c.values**2) for c in u)
        assert abs(inner) < 1e-10 * norm2

    def test_mean_mode_passes_through(self):
        grid = Grid(16)
        u = [
            RealField(grid, np.full(grid.shape, 1.0)),
            RealField(grid, np.full(grid.shape, -2.0)),
        ]
        out = leray_project(u)
        assert np.max(np.abs(out[0].values - 1.0)) < 1e-13
        assert np.max(np.abs(out[1].values + 2.0)) < 1e-13

    def test_commutes_with_derivatives(self):
        grid = Grid(32)
        rng = np.random.default_rng(41)
        u = [random_field(grid, rng, kmax=8) for _ in range(2)]
        for axis in range(2):
            left = [partial_derivative(c, axis) for c in leray_project(u)]
            right = leray_project([partial_derivative(c, axis) for c in u])
            scale = max(np.max(np.abs(c.values)) for c in left)
            for a, b in zip(left, right):
                assert np.max(np.abs(a.values - b.values)) < 1e-12 * scale

    def test_matches_bruteforce_projection(self):
        grid = Grid(16)
        rng = np.random.default_rng(43)
        u = [random_field(grid, rng) for _ in range(2)]
        out = leray_project(u)
        expected = bruteforce_leray([c.values for c in u])
        scale = max(np.max(np.abs(e)) for e in expected)
        for got, want in zip(out, expected):
            assert np.max(np.abs(got.values - want)) < 1e-12 * scale

    def test_rejects_mismatched_grids(self):
        u = [
            RealField(Grid(16), np.zeros((16, 16))),
            RealField(Grid(32), np.zeros((32, 32))),
        ]
        with pytest.raises(ValueError, match="mismatched grids"):
            leray_project(u)

    def test_rejects_wrong_component_count(self):
        grid = Grid(16)
        with pytest.raises(ValueError, match="components"):
            leray_project([RealField(grid, np.zeros(grid.shape))])


class TestPartialDerivative:
    def test_sine_to_cosine(self):
        grid = Grid(16)
        out = partial_derivative(RealField(grid, np.sin(grid.x[0])), 0)
        assert np.max(np.abs(out.values - np.cos(grid.x[0]))) < 1e-13

    def test_transverse_derivative_vanishes(self):
        grid = Grid(16)
        out = partial_derivative(RealField(grid, np.exp(np.sin(grid.x[0]))), 1)
        assert np.max(np.abs(out.values)) < 1e-13

    def test_finite_difference_convergence(self):
        # centered differences approach the spectral derivative at order h^2
        errors = []
        for n in (32, 64):
            grid = Grid(n)
            f = RealField(grid, np.exp(np.sin(grid.x[0])) * np.cos(grid.x[1]))
            spectral = partial_derivative(f, 0).values
            centered = (np.roll(f.values, -1, axis=0) - np.roll(f.values, 1, axis=0)) / (
                2 * grid.h
            )
            errors.append(np.max(np.abs(spectral - centered)))
        ratio = errors[0] / errors[1]
        assert 3.5 < ratio < 4.5

    def test_rejects_bad_axis(self):
        grid = Grid(16)
        with pytest.raises(ValueError, match="axis"):
            partial_derivative(RealField(grid, np.zeros(grid.shape)), 2)


class TestDealias:
    def test_low_modes_unchanged(self):
        grid = Grid(32)
        rng = np.random.default_rng(47)
        hat = forward_transform(random_field(grid, rng, kmax=10))
        out = dealias(hat)
        assert np.max(np.abs(out.coeffs - hat.coeffs)) < 1e-15

    def test_top_mode_removed(self):
        grid = Grid(16)
        f = RealField(grid, np.cos(7 * grid.x[0]))
        out = dealias(forward_transform(f))
        assert np.max(np.abs(out.coeffs)) < 1e-14

    def test_product_agrees_across_resolutions(self):
        # sin^2(x1) has modes {0, +-2}; the dealiased product must agree
        # on those modes whether computed on a coarse or a fine grid.
        coeffs = {}
        for n in (16, 64):
            grid = Grid(n)
            s = np.sin(grid.x[0])
            hat = dealias(forward_transform(RealField(grid, s * s)))
            coeffs[n] = {
                (0, 0): hat.coeffs[0, 0],
                (2, 0): hat.coeffs[2, 0],
                (-2, 0): hat.coeffs[-2, 0],
            }
        for key in coeffs[16]:
            assert coeffs[16][key] == pytest.approx(coeffs[64][key], abs=1e-12)


class TestLpNorm:
    def test_constant(self):
        grid = Grid(16)
        f = RealField(grid, np.full(grid.shape, -3.0))
        assert lp_norm(f, np.inf) == pytest.approx(3.0)
        assert lp_norm(f, 2) == pytest.approx(3.0 * (2 * np.pi))
        assert lp_norm(f, 4) == pytest.approx(3.0 * (2 * np.pi) ** 0.5)

    def test_sine_l2(self):
        grid = Grid(32)
        f = RealField(grid, np.sin(grid.x[0]))
        # integral of sin^2 over the torus is (2 pi)^2 / 2
        assert lp_norm(f, 2) == pytest.approx(np.sqrt(2 * np.pi**2), rel=1e-12)

    def test_rejects_p_below_one(self):
        grid = Grid(16)
        with pytest.raises(ValueError, match="p"):
            lp_norm(RealField(grid, np.zeros(grid.shape)), 0.5)


class TestSnapshot:
    @pytest.mark.parametrize("d", [2, 3])
    def test_round_trip_bit_exact(self, tmp_path, d):
        grid = Grid(16, d=d)
        rng = np.random.default_rng(53)
        f = random_field(grid, rng)
        path = tmp_path / "field.fstf"
        write_snapshot(f, path)
        back = read_snapshot(path)
        assert back.grid.n == grid.n and back.grid.d == grid.d
        assert np.array_equal(back.values, f.values)

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.fstf"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            read_snapshot(path)

    def test_rejects_bad_version(self, tmp_path):
        grid = Grid(16)
        f = RealField(grid, np.zeros(grid.shape))
        path = tmp_path / "field.fstf"
        write_snapshot(f, path)
        data = bytearray(path.read_bytes())
        data[4] = 9
        path.write_bytes(bytes(data))
        with pytest.raises(ValueError, match="version"):
            read_snapshot(path)

    def test_rejects_truncated_payload(self, tmp_path):
        grid = Grid(16)
        f = RealField(grid, np.zeros(grid.shape))
        path = tmp_path / "field.fstf"
        write_snapshot(f, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(ValueError, match="truncated"):
            read_snapshot(path)
