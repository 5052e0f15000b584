import numpy as np
import pytest

from splashwave.birkhoff_rott import (
    br_eval,
    br_eval_offcurve,
    br_eval_split,
    br_normal,
    br_t_explicit,
    matched_plain_state,
    matched_tilde_state,
    solve_omega_from_normal_velocity,
    solve_omega_t,
    transport_matrix,
)
from splashwave.conformal import map_points, tilde_from_plain
from splashwave.curves import InterfaceCurve, SheetState
from splashwave.errors import TooCloseToCurveError
from splashwave.spectral import (
    PeriodicGrid,
    fourier_derivative,
    hilbert_transform,
    mollify,
    trig_interpolate,
)


@pytest.fixture
def grid():
    return PeriodicGrid(256)


@pytest.fixture
def flat(grid):
    return InterfaceCurve(grid, "plain", np.zeros(grid.n), np.zeros(grid.n))


@pytest.fixture
def wavy(grid):
    a = grid.nodes
    p1 = 0.1 * np.sin(a) + 0.05 * np.sin(2 * a)
    p2 = -1.0 + 0.2 * np.cos(a) + 0.1 * np.sin(2 * a)
    return InterfaceCurve(grid, "plain", p1, p2)


@pytest.fixture
def circle(grid):
    a = grid.nodes
    return InterfaceCurve(grid, "tilde", 0.2 + 0.4 * np.cos(a), 0.1 + 0.4 * np.sin(a))


class TestOnCurve:
    def test_flat_sheet_is_half_hilbert(self, flat, grid):
        omega = np.cos(grid.nodes) + 0.3 * np.cos(2 * grid.nodes)
        vel = br_eval(flat, omega)
        assert np.max(np.abs(vel[:, 0])) < 1e-13
        assert np.max(np.abs(vel[:, 1] - hilbert_transform(omega) / 2)) < 1e-13

    def test_uniform_ring_moves_tangentially(self, circle, grid):
        # Uniform strength on a circle: the sheet average of zero interior
        # velocity and the exterior point vortex, purely tangential.
        gamma = 0.7
        vel = br_eval(circle, np.full(grid.n, gamma))
        want = 1j * gamma * np.exp(1j * grid.nodes) / (2 * 0.4)
        got = vel[:, 0] + 1j * vel[:, 1]
        assert np.max(np.abs(got - want)) < 1e-12

    @pytest.mark.parametrize("curve_name", ["wavy", "circle"])
    def test_split_evaluator_agrees(self, curve_name, grid, request):
        curve = request.getfixturevalue(curve_name)
        omega = np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes)
        assert np.max(np.abs(br_eval(curve, omega) - br_eval_split(curve, omega))) < 1e-12

    def test_mirror_symmetry(self, grid):
        # Even strength on a reflection-symmetric curve: horizontal velocity
        # even, vertical velocity odd in alpha (so it vanishes on the axis).
        a = grid.nodes
        c = InterfaceCurve(grid, "plain", 0.1 * np.sin(a), -1.0 + 0.2 * np.cos(a))
        omega = np.cos(a) + 0.3 * np.cos(2 * a)
        vel = br_eval(c, omega)
        # alpha -> -alpha maps node j to node (n - j) mod n
        flip = np.roll(vel[::-1], 1, axis=0)
        assert np.max(np.abs(vel[:, 0] - flip[:, 0])) < 1e-12
        assert np.max(np.abs(vel[:, 1] + flip[:, 1])) < 1e-12


class TestOffCurve:
    def test_flat_sheet_closed_form(self, flat, grid):
        # For omega = cos on the line, u - iv = exp(-i w)/2 below the sheet.
        omega = np.cos(grid.nodes)
        pts = np.array([-1j, 0.5 - 0.8j, -2.0 - 1.5j])
        vel = br_eval_offcurve(flat, omega, pts)
        got = vel[:, 0] - 1j * vel[:, 1]
        assert np.max(np.abs(got - np.exp(-1j * pts) / 2)) < 1e-14

    def test_symmetry_axis_velocity_is_horizontal(self, flat, grid):
        # Even strength: on the axis x = 0 the vertical component vanishes.
        omega = np.cos(grid.nodes) - 0.2 * np.cos(3 * grid.nodes)
        vel = br_eval_offcurve(flat, omega, np.array([-0.7j, -1.3j, -2.9j]))
        assert np.max(np.abs(vel[:, 1])) < 1e-14
        assert np.min(np.abs(vel[:, 0])) > 1e-3

    def test_ring_interior_still_exterior_vortex(self, circle, grid):
        gamma = 0.7
        center = 0.2 + 0.1j
        inside = br_eval_offcurve(circle, np.full(grid.n, gamma), np.array([center]))
        assert np.max(np.abs(inside)) < 1e-13
        zout = center + 1.5
        out = br_eval_offcurve(circle, np.full(grid.n, gamma), np.array([zout]))
        want = gamma / (1j * (zout - center))
        assert abs((out[0, 0] - 1j * out[0, 1]) - want) < 1e-13

    def test_clearance_enforced(self, circle, grid):
        pt = 0.2 + 0.1j + 0.4 - 1e-3  # next to the rightmost node
        with pytest.raises(TooCloseToCurveError):
            br_eval_offcurve(circle, np.ones(grid.n), np.array([pt]))

    def test_clearance_sees_periodic_images(self, flat, grid):
        with pytest.raises(TooCloseToCurveError):
            br_eval_offcurve(flat, np.cos(grid.nodes), np.array([2 * np.pi - 1e-3 + 0j]))


class TestCurveMotionDerivative:
    @pytest.mark.parametrize("domain", ["plain", "tilde"])
    def test_matches_finite_difference_in_time(self, grid, domain):
        a = grid.nodes
        if domain == "plain":
            base = InterfaceCurve(grid, "plain", 0.1 * np.sin(a), -1.0 + 0.2 * np.cos(a))
        else:
            base = InterfaceCurve(grid, "tilde", 0.5 + 0.25 * np.cos(a), 0.1 + 0.35 * np.sin(a))
        omega = np.cos(a) - 0.4 * np.sin(2 * a)
        V = np.stack([0.3 * np.cos(a), 0.1 * np.sin(2 * a)], axis=1)
        t = 1e-5
        plus = base.with_components(base.p1 + t * V[:, 0], base.p2 + t * V[:, 1])
        minus = base.with_components(base.p1 - t * V[:, 0], base.p2 - t * V[:, 1])
        fd = (br_eval(plus, omega) - br_eval(minus, omega)) / (2 * t)
        assert np.max(np.abs(br_t_explicit(base, omega, V) - fd)) < 1e-7

    def test_reparametrization_identity(self, wavy, grid):
        # Moving nodes along the curve at speed z_alpha shifts the sheet:
        # the velocity changes by d_alpha BR minus BR of the shifted strength.
        omega = np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes)
        zdot = np.stack([wavy.za.real, wavy.za.imag], axis=1)
        lhs = br_t_explicit(wavy, omega, zdot)
        vel = br_eval(wavy, omega)
        rhs = (
            np.stack([fourier_derivative(vel[:, 0]), fourier_derivative(vel[:, 1])], axis=1)
            - br_eval(wavy, fourier_derivative(omega))
        )
        assert np.max(np.abs(lhs - rhs)) < 1e-10


class TestStrengthDerivativeSolve:
    def manufactured(self, curve, smoother=None):
        a = curve.grid.nodes
        wt = np.sin(2 * a) + 0.3 * np.cos(a)
        vel = br_eval(curve, wt)
        tr = 2.0 * (vel[:, 0] * curve.za.real + vel[:, 1] * curve.za.imag)
        rhs = wt + (smoother(tr) if smoother else tr)
        return wt, rhs

    def test_recovers_manufactured_solution(self, wavy):
        wt, rhs = self.manufactured(wavy)
        assert np.max(np.abs(solve_omega_t(wavy, rhs) - wt)) < 1e-9

    def test_warm_start(self, wavy):
        wt, rhs = self.manufactured(wavy)
        got = solve_omega_t(wavy, rhs, omega_t0=wt + 1e-3)
        assert np.max(np.abs(got - wt)) < 1e-9

    def test_smoothed_operator(self, wavy):
        S = lambda f: mollify(f, 0.15)
        wt, rhs = self.manufactured(wavy, smoother=S)
        assert np.max(np.abs(solve_omega_t(wavy, rhs, smoother=S) - wt)) < 1e-9

    def test_dense_matrix_matches_operator(self, wavy, grid):
        omega = np.sin(3 * grid.nodes)
        vel = br_eval(wavy, omega)
        want = 2.0 * (vel[:, 0] * wavy.za.real + vel[:, 1] * wavy.za.imag)
        assert np.max(np.abs(transport_matrix(wavy) @ omega - want)) < 1e-12

    def test_tilde_system(self, circle):
        wt, rhs = self.manufactured(circle)
        assert np.max(np.abs(solve_omega_t(circle, rhs) - wt)) < 1e-9


class TestNormalVelocitySolve:
    def test_flat_closed_form(self, flat, grid):
        # On the flat sheet br_normal = H(omega)/2, so the strength for a
        # prescribed normal velocity b is exactly -2 H(b).
        b = np.sin(grid.nodes) - 0.2 * np.sin(3 * grid.nodes)
        omega = solve_omega_from_normal_velocity(flat, b)
        assert np.max(np.abs(omega + 2.0 * hilbert_transform(b))) < 1e-11
        assert abs(np.mean(omega)) < 1e-14

    def test_residual_and_mean_pin(self, wavy, grid):
        b = br_normal(wavy, np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes))
        omega = solve_omega_from_normal_velocity(wavy, b, mean=0.25)
        assert np.max(np.abs(br_normal(wavy, omega) - b)) < 1e-11
        assert abs(np.mean(omega) - 0.25) < 1e-13

    def test_unique_given_mean(self, wavy, grid):
        omega0 = np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes)
        b = br_normal(wavy, omega0)
        omega = solve_omega_from_normal_velocity(wavy, b, mean=0.0)
        assert np.max(np.abs(omega - omega0)) < 1e-10

    def test_tilde_image_reproduces_interior_field(self, wavy, grid):
        # The decisive check: matching one real function on the curve must
        # reproduce the entire pulled-back complex velocity field inside the
        # water region, because the water-side field is determined by its
        # boundary normal component.
        omega = np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes)
        image = tilde_from_plain(wavy)
        solved = solve_omega_from_normal_velocity(image, br_normal(wavy, omega))
        w0 = np.array([-0.3 - 1.9j, 1.2 - 2.2j, 0.4 - 3.0j])
        z0 = map_points(w0)
        vt = br_eval_offcurve(image, solved, z0)
        vp = br_eval_offcurve(wavy, omega, w0)
        a0 = 4.0 * z0 / (1.0 + z0**4)
        pulled = a0 * (vp[:, 0] - 1j * vp[:, 1])
        got = vt[:, 0] - 1j * vt[:, 1]
        assert np.max(np.abs(got - pulled)) < 1e-12

    def test_value_transport_is_not_the_matched_density(self, wavy, grid):
        # Carrying strength values across the map misses the water-side
        # field by a percent-level amount; the solve is not optional.
        omega = np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes)
        image = tilde_from_plain(wavy)
        gap = br_normal(image, omega) - br_normal(wavy, omega)
        assert np.max(np.abs(gap)) > 1e-3


class TestMatchedStates:
    def test_roundtrip(self, wavy, grid):
        omega = np.cos(grid.nodes) - 0.4 * np.sin(2 * grid.nodes)
        state = SheetState(wavy, omega, t=0.3)
        twin = matched_tilde_state(state)
        assert twin.curve.domain == "tilde"
        assert twin.t == state.t
        assert np.max(np.abs(br_normal(twin.curve, twin.omega) - br_normal(wavy, omega))) < 1e-11
        back = matched_plain_state(twin)
        assert np.max(np.abs(back.curve.z - wavy.z)) < 1e-12
        assert np.max(np.abs(back.omega - omega)) < 1e-10

    def test_domain_guards(self, wavy, circle, grid):
        omega = np.cos(grid.nodes)
        with pytest.raises(ValueError):
            matched_tilde_state(SheetState(circle, omega))
        with pytest.raises(ValueError):
            matched_plain_state(SheetState(wavy, omega))


class TestGaugeIndependence:
    @pytest.mark.parametrize("curve_name", ["wavy", "circle"])
    def test_velocity_is_geometric(self, curve_name, grid, request):
        # br_eval depends on the curve image and the density omega d(alpha)
        # only: relabeling the parameter and moving omega as a density gives
        # the same velocity at matched physical points.
        curve = request.getfixturevalue(curve_name)
        a = grid.nodes
        omega = np.cos(a) - 0.4 * np.sin(2 * a)
        phi = a + 0.2 * np.sin(a)  # smooth circle diffeomorphism
        dphi = 1.0 + 0.2 * np.cos(a)
        p1 = np.array([trig_interpolate(curve.p1, x) for x in phi])
        p2 = np.array([trig_interpolate(curve.p2, x) for x in phi])
        if curve.domain == "plain":
            p1 = p1 + (phi - a)  # p1 stores z1 - alpha
        relabeled = InterfaceCurve(grid, curve.domain, p1, p2)
        om_density = np.array([trig_interpolate(omega, x) for x in phi]) * dphi
        vel = br_eval(curve, omega)
        matched = np.stack(
            [
                [trig_interpolate(vel[:, 0], x) for x in phi],
                [trig_interpolate(vel[:, 1], x) for x in phi],
            ],
            axis=1,
        )
        got = br_eval(relabeled, om_density)
        assert np.max(np.abs(got - matched)) < 1e-8
