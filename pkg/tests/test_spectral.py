import numpy as np
import pytest

from splashwave.spectral import (
    PeriodicGrid,
    dealiased_product,
    fourier_derivative,
    hilbert_transform,
    integral,
    lambda_op,
    mean_free_antiderivative,
    mollify,
    resample,
    sobolev_norm,
    trig_interpolate,
    wavenumbers,
)


@pytest.fixture
def grid():
    return PeriodicGrid(512)


class TestGrid:
    def test_nodes_span_period(self, grid):
        assert grid.nodes[0] == -np.pi
        assert np.allclose(np.diff(grid.nodes), grid.spacing)
        assert grid.nodes[-1] + grid.spacing == pytest.approx(np.pi)

    @pytest.mark.parametrize("n", [15, 14, 0, 17])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            PeriodicGrid(n)

    def test_wavenumber_layout(self):
        k = wavenumbers(8)
        assert list(k) == [0, 1, 2, 3, -4, -3, -2, -1]


class TestDerivative:
    def test_analytic_first_derivative(self, grid):
        a = grid.nodes
        f = np.exp(np.cos(a))
        want = -np.sin(a) * np.exp(np.cos(a))
        assert np.max(np.abs(fourier_derivative(f) - want)) < 1e-11

    def test_analytic_second_derivative(self, grid):
        a = grid.nodes
        f = np.exp(np.cos(a))
        want = (np.sin(a) ** 2 - np.cos(a)) * np.exp(np.cos(a))
        assert np.max(np.abs(fourier_derivative(f, 2) - want)) < 1e-9

    def test_high_orders_compose(self):
        a = PeriodicGrid(128).nodes
        f = np.sin(3 * a) + 0.2 * np.cos(7 * a)
        d3 = fourier_derivative(f, 3)
        assert np.allclose(d3, fourier_derivative(fourier_derivative(f, 2)), atol=1e-8)
        d4 = fourier_derivative(f, 4)
        want = 81 * np.sin(3 * a) + 0.2 * 7**4 * np.cos(7 * a)
        assert np.max(np.abs(d4 - want)) < 1e-7

    def test_pure_mode_exact(self, grid):
        a = grid.nodes
        assert np.allclose(fourier_derivative(np.sin(5 * a)), 5 * np.cos(5 * a), atol=1e-12)

    def test_odd_order_kills_nyquist(self):
        n = 32
        a = PeriodicGrid(n).nodes
        f = np.cos((n // 2) * (a + np.pi))
        assert np.max(np.abs(fourier_derivative(f))) < 1e-13

    @pytest.mark.parametrize("m", [0, 5, -1])
    def test_rejects_bad_order(self, grid, m):
        with pytest.raises(ValueError):
            fourier_derivative(np.sin(grid.nodes), m)

    def test_rejects_nonfinite(self, grid):
        f = np.sin(grid.nodes)
        f[3] = np.nan
        with pytest.raises(ValueError):
            fourier_derivative(f)


class TestHilbert:
    def test_low_modes(self, grid):
        a = grid.nodes
        assert np.allclose(hilbert_transform(np.cos(a)), np.sin(a), atol=1e-13)
        assert np.allclose(hilbert_transform(np.sin(a)), -np.cos(a), atol=1e-13)
        assert np.allclose(hilbert_transform(np.cos(3 * a)), np.sin(3 * a), atol=1e-13)
        assert np.max(np.abs(hilbert_transform(np.full(512, 2.5)))) < 1e-14

    def test_against_principal_value_quadrature(self, grid):
        # Alternate-point trapezoid rule for the periodic PV integral is an
        # independent, spectrally accurate discretization of the transform.
        n, a = grid.n, grid.nodes
        f = 1.0 / (2.0 + np.sin(a))
        quad = np.empty(n)
        for i in range(n):
            mask = (np.arange(n) - i) % 2 == 1
            quad[i] = (2.0 / n) * np.sum(f[mask] / np.tan((a[i] - a[mask]) / 2.0))
        assert np.max(np.abs(hilbert_transform(f) - quad)) < 1e-12

    def test_involution_up_to_mean(self, grid):
        # H(H(f)) = -(f - mean f) on Nyquist-free fields
        rng = np.random.default_rng(7)
        f = rng.standard_normal(grid.n)
        F = np.fft.fft(f)
        F[grid.n // 2] = 0.0
        f = np.fft.ifft(F).real
        hh = hilbert_transform(hilbert_transform(f))
        assert np.max(np.abs(hh + (f - np.mean(f)))) < 1e-12

    def test_lambda_is_derivative_of_hilbert(self, grid):
        rng = np.random.default_rng(11)
        f = rng.standard_normal(grid.n)
        assert np.allclose(
            lambda_op(f),
            fourier_derivative(hilbert_transform(f)),
            atol=1e-11,
        )

    def test_lambda_on_modes(self, grid):
        a = grid.nodes
        assert np.allclose(lambda_op(np.cos(4 * a)), 4 * np.cos(4 * a), atol=1e-12)
        assert np.max(np.abs(lambda_op(np.ones(grid.n)))) < 1e-14


class TestMollify:
    def test_zero_width_is_identity(self, grid):
        f = np.exp(np.sin(grid.nodes))
        out = mollify(f, 0.0)
        assert out is not f
        assert np.array_equal(out, f)

    def test_pure_mode_damping(self, grid):
        a = grid.nodes
        for k in (1, 5, 20):
            got = mollify(np.cos(k * a), 0.1)
            assert np.allclose(got, np.exp(-0.5 * (0.1 * k) ** 2) * np.cos(k * a), atol=1e-13)

    def test_preserves_mean(self, grid):
        f = np.exp(np.cos(grid.nodes))
        assert np.mean(mollify(f, 0.3)) == pytest.approx(np.mean(f), abs=1e-14)

    def test_rejects_negative_width(self, grid):
        with pytest.raises(ValueError):
            mollify(np.sin(grid.nodes), -0.1)

    def test_commutator_with_multiplication_is_small(self, grid):
        # ||mollify(g f) - g mollify(f)|| <= C * width for smooth g, and the
        # ratio shrinks with the width (second-order in practice).
        a = grid.nodes
        f = np.sin(5 * a)
        g = np.exp(np.sin(a))
        widths = [0.2, 0.1, 0.05, 0.025]
        ratios = []
        for d in widths:
            comm = mollify(f * g, d) - g * mollify(f, d)
            ratios.append(sobolev_norm(comm, 0) / d)
        assert all(r < 1.0 for r in ratios)
        assert all(b < a_ for a_, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 0.25

    def test_two_dimensional_fields(self, grid):
        a = grid.nodes
        f = np.stack([np.cos(a), np.sin(2 * a)], axis=1)
        out = mollify(f, 0.2)
        assert np.allclose(out[:, 0], mollify(np.cos(a), 0.2), atol=1e-14)
        assert np.allclose(out[:, 1], mollify(np.sin(2 * a), 0.2), atol=1e-14)


class TestInterpolation:
    def test_matches_analytic_function(self, grid):
        f = np.exp(np.sin(grid.nodes))
        pts = np.array([-2.7, -1.1, 0.013, 0.9, 2.2, 3.1])
        assert np.max(np.abs(trig_interpolate(f, pts) - np.exp(np.sin(pts)))) < 1e-13

    def test_reproduces_nodes(self, grid):
        f = np.exp(np.sin(grid.nodes))
        assert np.max(np.abs(trig_interpolate(f, grid.nodes) - f)) < 1e-13

    def test_scalar_input(self, grid):
        f = np.sin(grid.nodes)
        val = trig_interpolate(f, 0.37)
        assert isinstance(val, float)
        assert val == pytest.approx(np.sin(0.37), abs=1e-13)

    def test_nyquist_cosine_convention(self):
        n = 32
        a = PeriodicGrid(n).nodes
        f = np.cos((n // 2) * (a + np.pi))
        xs = np.linspace(-np.pi, np.pi, 97)
        assert np.allclose(trig_interpolate(f, xs), np.cos((n // 2) * (xs + np.pi)), atol=1e-12)


class TestResample:
    def test_matches_interpolant_on_fine_grid(self):
        n = 32
        a = PeriodicGrid(n).nodes
        f = np.exp(np.sin(a)) + 0.3 * np.cos((n // 2) * (a + np.pi))
        fine = PeriodicGrid(4 * n)
        assert np.allclose(resample(f, 4 * n), trig_interpolate(f, fine.nodes), atol=1e-13)

    def test_round_trip(self):
        n = 32
        a = PeriodicGrid(n).nodes
        f = np.exp(np.sin(a)) + 0.3 * np.cos((n // 2) * (a + np.pi))
        assert np.allclose(resample(resample(f, 4 * n), n), f, atol=1e-13)

    def test_downsample_bandlimited_exact(self):
        a = PeriodicGrid(256).nodes
        f = np.cos(3 * a) - 2 * np.sin(7 * a)
        coarse = PeriodicGrid(64).nodes
        assert np.allclose(resample(f, 64), np.cos(3 * coarse) - 2 * np.sin(7 * coarse), atol=1e-13)

    def test_preserves_mean(self, grid):
        f = np.exp(np.cos(grid.nodes))
        assert np.mean(resample(f, 128)) == pytest.approx(np.mean(f), abs=1e-13)

    def test_same_size_copy(self, grid):
        f = np.sin(grid.nodes)
        out = resample(f, grid.n)
        assert out is not f
        assert np.array_equal(out, f)


class TestDealiasedProduct:
    def test_resolved_product_exact(self):
        a = PeriodicGrid(64).nodes
        f, g = np.cos(3 * a), np.cos(5 * a)
        assert np.allclose(dealiased_product(f, g), f * g, atol=1e-13)

    def test_aliasing_removed(self):
        # cos(15a)^2 = (1 + cos 30a)/2; on 32 nodes the 30-mode aliases to a
        # spurious cos(2a) in the raw product but is truncated cleanly here.
        n = 32
        a = PeriodicGrid(n).nodes
        f = np.cos(15 * (a + np.pi))
        assert np.max(np.abs(dealiased_product(f, f) - 0.5)) < 1e-13
        assert np.max(np.abs(f * f - 0.5)) > 0.49


class TestIntegralsAndNorms:
    def test_integral_exact_on_trig(self, grid):
        a = grid.nodes
        assert integral(np.ones(grid.n)) == pytest.approx(2 * np.pi, abs=1e-13)
        assert integral(np.cos(a) ** 2) == pytest.approx(np.pi, abs=1e-13)
        assert abs(integral(np.sin(3 * a))) < 1e-13

    def test_l2_norm_analytic(self, grid):
        a = grid.nodes
        assert sobolev_norm(np.sin(a), 0) == pytest.approx(np.sqrt(np.pi), abs=1e-13)
        assert sobolev_norm(np.full(grid.n, 3.0), 0) == pytest.approx(3 * np.sqrt(2 * np.pi), abs=1e-13)

    def test_h1_norm_analytic(self, grid):
        assert sobolev_norm(np.cos(2 * grid.nodes), 1) == pytest.approx(np.sqrt(5 * np.pi), abs=1e-13)

    def test_parseval(self, grid):
        rng = np.random.default_rng(3)
        f = rng.standard_normal(grid.n)
        assert sobolev_norm(f, 0) ** 2 == pytest.approx(integral(f * f), rel=1e-12)

    def test_norm_monotone_in_index(self, grid):
        f = np.exp(np.sin(grid.nodes))
        norms = [sobolev_norm(f, s) for s in (0, 1, 2, 3)]
        assert all(x < y for x, y in zip(norms, norms[1:]))

    def test_rejects_bad_index(self, grid):
        with pytest.raises(ValueError):
            sobolev_norm(np.sin(grid.nodes), -1)
        with pytest.raises(ValueError):
            sobolev_norm(np.sin(grid.nodes), 7)


class TestAntiderivative:
    def test_trig_pairs(self, grid):
        a = grid.nodes
        assert np.allclose(mean_free_antiderivative(np.cos(a)), np.sin(a), atol=1e-13)
        assert np.allclose(mean_free_antiderivative(np.sin(a)), -np.cos(a), atol=1e-13)

    def test_inverts_derivative_up_to_mean(self, grid):
        f = np.exp(np.cos(grid.nodes))
        got = fourier_derivative(mean_free_antiderivative(f))
        assert np.allclose(got, f - np.mean(f), atol=1e-12)

    def test_result_mean_free(self, grid):
        f = np.exp(np.cos(grid.nodes)) + 4.0
        assert abs(np.mean(mean_free_antiderivative(f))) < 1e-14
