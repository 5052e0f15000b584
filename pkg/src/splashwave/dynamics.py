"""Time evolution of the interface in both domains.

The plain system moves the physical curve with its Birkhoff-Rott velocity
plus a tangential gauge term that keeps |z_alpha| uniform; the strength obeys
a Bernoulli-type equation that is implicit in omega_t. The tilde system is
the same flow written on the mapped curve, where the map jet (a, b, Q, G)
enters the coefficients; with the identity jet its right-hand side reduces
term by term to the plain one.

A three-parameter mollified variant regularizes the kinematics (delta), the
gauge transport (mu), and adds a strength dissipation of size eps; all three
at zero reproduce the unregularized tilde system exactly, so the plain and
tilde entry points are thin wrappers over one assembly.

Positions advance jointly with the strength under classical RK4. After each
step the strength mean is pinned (circulation is conserved exactly by the
continuous flow) and the parametrization is re-uniformized whenever the
tangent speed develops spread.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .birkhoff_rott import br_eval, br_t_explicit, solve_omega_t
from .conformal import MapJet, identity_jet, jet_for_curve, q_point_distances
from .curves import (
    InterfaceCurve,
    SheetState,
    arc_chord,
    min_pair_distance,
    self_intersections,
)
from .errors import BlowUpError, IllConditionedError
from .spectral import (
    dealiased_product,
    fourier_derivative,
    lambda_op,
    mean_free_antiderivative,
    mollify,
    trig_interpolate,
)


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[:, 0] * v[:, 0] + u[:, 1] * v[:, 1]


def _d_alpha(v: np.ndarray) -> np.ndarray:
    return np.stack([fourier_derivative(v[:, 0]), fourier_derivative(v[:, 1])], axis=1)


def gauge_speed(curve: InterfaceCurve, base: np.ndarray, smoother=None) -> np.ndarray:
    """Tangential speed that keeps |z_alpha| uniform under z_t = base + c z_a.

    Normalized to vanish at the first node. `smoother` is applied to the
    differentiated base field before projecting on the tangent.
    """
    dbase = _d_alpha(base)
    if smoother is not None:
        dbase = np.stack([smoother(dbase[:, 0]), smoother(dbase[:, 1])], axis=1)
    za = curve.za
    psi = (dbase[:, 0] * za.real + dbase[:, 1] * za.imag) / curve.speed**2
    F = mean_free_antiderivative(psi)
    return -(F - F[0])


def surface_tension_scalar(curve: InterfaceCurve, jet: MapJet) -> np.ndarray:
    """The quantity whose alpha-derivative drives the strength under tension.

    Equals the physical curvature expressed through mapped-domain fields:
    Q * curvature(tilde) plus the second-order map correction. The identity
    jet leaves just the curvature of the curve itself.
    """
    za = curve.za
    az = jet.a * za
    correction = (jet.Q**3 / curve.speed**3) * (
        jet.hess2_contract(za) * az.real - jet.hess1_contract(za) * az.imag
    )
    return correction + jet.Q * curve.curvature


@dataclass
class MotionBundle:
    """One right-hand-side evaluation with everything observers need."""

    z_t: np.ndarray
    omega_t: np.ndarray
    c: np.ndarray
    br: np.ndarray
    br_t_partial: np.ndarray
    tau: float
    phi: np.ndarray | None = None
    jet: MapJet | None = None


def _assemble_strength_rhs(curve, omega, tau, jet, c, BR, brt, dealias):
    za = curve.za
    zav = np.stack([za.real, za.imag], axis=1)
    speed2 = curve.speed**2
    Q2 = jet.Q**2
    Q2_alpha = 2.0 * jet.Q * jet.Q_alpha(za)
    om2 = dealiased_product(omega, omega) if dealias else omega * omega
    com = dealiased_product(c, omega) if dealias else c * omega
    rhs = -2.0 * _dot(brt, zav)
    rhs -= (BR[:, 0] ** 2 + BR[:, 1] ** 2) * Q2_alpha
    rhs -= fourier_derivative(Q2 * om2 / (4.0 * speed2))
    rhs += 2.0 * c * _dot(_d_alpha(BR), zav)
    rhs += fourier_derivative(com)
    rhs -= 2.0 * np.imag(jet.a * za)
    if tau != 0.0:
        rhs += tau * fourier_derivative(surface_tension_scalar(curve, jet))
    return rhs


def rhs_regularized(
    state: SheetState,
    tau: float,
    eps: float = 0.0,
    delta: float = 0.0,
    mu: float = 0.0,
    k: int = 3,
    c_override: np.ndarray | None = None,
    dealias: bool = False,
    omega_t_guess: np.ndarray | None = None,
) -> MotionBundle:
    """Mollified tilde evolution; eps = delta = mu = 0 is the exact system."""
    curve = state.curve
    if curve.domain != "tilde":
        raise ValueError("the regularized system is posed on tilde curves")
    omega = state.omega
    jet = jet_for_curve(curve)
    za = curve.za
    zav = np.stack([za.real, za.imag], axis=1)

    BR = br_eval(curve, omega)
    base = jet.Q[:, None] ** 2 * BR

    smooth_mu = (lambda f: mollify(f, mu)) if mu > 0 else None
    if c_override is not None:
        c = np.asarray(c_override, dtype=float)
    else:
        c = gauge_speed(curve, base, smoother=smooth_mu)

    kin = mollify(mollify(base, delta), delta)
    if mu > 0:
        transport = mollify(c[:, None] * mollify(zav, mu), mu)
    else:
        transport = c[:, None] * zav
    z_t = kin + transport

    brt = br_t_explicit(curve, omega, z_t)
    rhs = _assemble_strength_rhs(curve, omega, tau, jet, c, BR, brt, dealias)
    if delta > 0:
        rhs = mollify(mollify(rhs, delta), delta)
        smoother = lambda f: mollify(mollify(f, delta), delta)
    else:
        smoother = None
    if eps > 0:
        rhs = rhs - eps * mollify(mollify(lambda_op(omega) / jet.Q ** (2 * k + 3), mu), mu)
    omega_t = solve_omega_t(curve, rhs, omega_t0=omega_t_guess, smoother=smoother)

    phi = jet.Q**2 * omega / (2.0 * curve.speed) - c * curve.speed
    return MotionBundle(z_t, omega_t, c, BR, brt, tau, phi=phi, jet=jet)


def rhs_tilde(state: SheetState, tau: float, **kw) -> MotionBundle:
    """Exact mapped-domain evolution."""
    return rhs_regularized(state, tau, eps=0.0, delta=0.0, mu=0.0, **kw)


def rhs_plain(
    state: SheetState,
    tau: float,
    c_override: np.ndarray | None = None,
    dealias: bool = False,
    omega_t_guess: np.ndarray | None = None,
) -> MotionBundle:
    """Physical-domain evolution (the identity-jet form of the system)."""
    curve = state.curve
    if curve.domain != "plain":
        raise ValueError("rhs_plain expects a plain-domain curve")
    omega = state.omega
    jet = identity_jet(curve.grid.n)
    za = curve.za
    zav = np.stack([za.real, za.imag], axis=1)

    BR = br_eval(curve, omega)
    if c_override is not None:
        c = np.asarray(c_override, dtype=float)
    else:
        c = gauge_speed(curve, BR)
    z_t = BR + c[:, None] * zav

    brt = br_t_explicit(curve, omega, z_t)
    rhs = _assemble_strength_rhs(curve, omega, tau, jet, c, BR, brt, dealias)
    omega_t = solve_omega_t(curve, rhs, omega_t0=omega_t_guess)
    return MotionBundle(z_t, omega_t, c, BR, brt, tau, phi=None, jet=None)


def evaluate_rhs(state: SheetState, tau: float, params: dict | None = None, **kw) -> MotionBundle:
    params = params or {}
    if state.curve.domain == "plain":
        return rhs_plain(state, tau, **kw)
    return rhs_regularized(state, tau, **params, **kw)


def cfl_dt(curve: InterfaceCurve, tau: float) -> float:
    """Stable step for the stiffest resolved mode (capillary or gravity).

    Uses the local node spacing, so strongly nonuniform parametrizations get
    the step their fastest-refined region needs. On mapped-domain curves a
    grid mode of label wavenumber k oscillates physically at Q k / |z_a|, so
    the conformal factor enters the local stiffness as well.
    """
    h = 2.0 * np.pi * curve.speed / curve.grid.n
    q = jet_for_curve(curve).Q if curve.domain == "tilde" else 1.0
    if tau > 0:
        return 0.5 * float(np.min(h**1.5 / np.sqrt(tau * np.pi * q**3)))
    return 0.5 * float(np.sqrt(np.min(h / (2.0 * q))))


def step_rk4(
    state: SheetState,
    dt: float,
    tau: float,
    params: dict | None = None,
    first_bundle: MotionBundle | None = None,
    **kw,
):
    """Classical RK4 on (p1, p2, omega); returns the new state and the stage-1
    bundle (useful for diagnostics at the pre-step time)."""
    curve = state.curve
    mean0 = float(np.mean(state.omega))

    def make(p1, p2, om, t):
        if not (
            np.all(np.isfinite(p1)) and np.all(np.isfinite(p2)) and np.all(np.isfinite(om))
        ):
            raise BlowUpError(f"solution lost finiteness at t = {t:.6g}", last_state=state)
        om = om + (mean0 - np.mean(om))
        return SheetState(curve.with_components(p1, p2), om, t)

    def f(s, guess):
        b = evaluate_rhs(s, tau, params, omega_t_guess=guess, **kw)
        return b

    b1 = first_bundle if first_bundle is not None else f(state, kw.get("omega_t_guess"))
    p1, p2, om, t = curve.p1, curve.p2, state.omega, state.t
    k1 = (b1.z_t[:, 0], b1.z_t[:, 1], b1.omega_t)
    s2 = make(p1 + 0.5 * dt * k1[0], p2 + 0.5 * dt * k1[1], om + 0.5 * dt * k1[2], t + 0.5 * dt)
    b2 = f(s2, k1[2])
    k2 = (b2.z_t[:, 0], b2.z_t[:, 1], b2.omega_t)
    s3 = make(p1 + 0.5 * dt * k2[0], p2 + 0.5 * dt * k2[1], om + 0.5 * dt * k2[2], t + 0.5 * dt)
    b3 = f(s3, k2[2])
    k3 = (b3.z_t[:, 0], b3.z_t[:, 1], b3.omega_t)
    s4 = make(p1 + dt * k3[0], p2 + dt * k3[1], om + dt * k3[2], t + dt)
    b4 = f(s4, k3[2])
    k4 = (b4.z_t[:, 0], b4.z_t[:, 1], b4.omega_t)

    w = dt / 6.0
    new_p1 = p1 + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    new_p2 = p2 + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    new_om = om + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
    if not (
        np.all(np.isfinite(new_p1)) and np.all(np.isfinite(new_p2)) and np.all(np.isfinite(new_om))
    ):
        raise BlowUpError(f"solution lost finiteness at t = {t + dt:.6g}", last_state=state)
    new_om = new_om + (mean0 - np.mean(new_om))
    return SheetState(curve.with_components(new_p1, new_p2), new_om, t + dt), b1


def step_rk4_matched(plain: SheetState, tilde: SheetState, dt: float, tau: float):
    """Advance twin representations of one flow in lockstep.

    The plain state evolves with its natural uniform-speed gauge. The tilde
    state evolves its own full system, except that its transport coefficient
    is slaved per stage so both parametrizations track the same material
    labels: c = <zdot/a - Q^2 BR, z_alpha> / |z_alpha|^2, with zdot the plain
    node motion pushed through the map derivative. Everything physical (the
    sheet velocity and the strength equation) stays internal to each system,
    so the pointwise agreement of P(z) with the tilde curve is a strong
    cross-check of the two assemblies. Returns the advanced pair.
    """
    if plain.curve.domain != "plain" or tilde.curve.domain != "tilde":
        raise ValueError("step_rk4_matched expects a (plain, tilde) pair")
    if plain.curve.grid.n != tilde.curve.grid.n:
        raise ValueError("twin states must share a grid")

    mean_p = float(np.mean(plain.omega))
    mean_t = float(np.mean(tilde.omega))

    def stage(sp, st, guess_p, guess_t):
        bp = rhs_plain(sp, tau, omega_t_guess=guess_p)
        jet = jet_for_curve(st.curve)
        zdot = bp.z_t[:, 0] + 1j * bp.z_t[:, 1]
        target = zdot / jet.a
        base = jet.Q[:, None] ** 2 * br_eval(st.curve, st.omega)
        za = st.curve.za
        c_sl = (
            (target.real - base[:, 0]) * za.real + (target.imag - base[:, 1]) * za.imag
        ) / st.curve.speed**2
        bt = rhs_tilde(st, tau, c_override=c_sl, omega_t_guess=guess_t)
        return bp, bt

    def advance(s, k, h, mean0):
        om = s.omega + h * k.omega_t
        p1 = s.curve.p1 + h * k.z_t[:, 0]
        p2 = s.curve.p2 + h * k.z_t[:, 1]
        if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2)) and np.all(np.isfinite(om))):
            raise BlowUpError(f"solution lost finiteness at t = {s.t + h:.6g}", last_state=s)
        om = om + (mean0 - np.mean(om))
        return SheetState(s.curve.with_components(p1, p2), om, s.t + h)

    t = plain.t
    b1p, b1t = stage(plain, tilde, None, None)
    s2p, s2t = advance(plain, b1p, 0.5 * dt, mean_p), advance(tilde, b1t, 0.5 * dt, mean_t)
    b2p, b2t = stage(s2p, s2t, b1p.omega_t, b1t.omega_t)
    s3p, s3t = advance(plain, b2p, 0.5 * dt, mean_p), advance(tilde, b2t, 0.5 * dt, mean_t)
    b3p, b3t = stage(s3p, s3t, b2p.omega_t, b2t.omega_t)
    s4p, s4t = advance(plain, b3p, dt, mean_p), advance(tilde, b3t, dt, mean_t)
    b4p, b4t = stage(s4p, s4t, b3p.omega_t, b3t.omega_t)

    def combine(s, b1, b2, b3, b4, mean0):
        w = dt / 6.0
        p1 = s.curve.p1 + w * (b1.z_t[:, 0] + 2 * b2.z_t[:, 0] + 2 * b3.z_t[:, 0] + b4.z_t[:, 0])
        p2 = s.curve.p2 + w * (b1.z_t[:, 1] + 2 * b2.z_t[:, 1] + 2 * b3.z_t[:, 1] + b4.z_t[:, 1])
        om = s.omega + w * (b1.omega_t + 2 * b2.omega_t + 2 * b3.omega_t + b4.omega_t)
        if not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2)) and np.all(np.isfinite(om))):
            raise BlowUpError(f"solution lost finiteness at t = {t + dt:.6g}", last_state=s)
        om = om + (mean0 - np.mean(om))
        return SheetState(s.curve.with_components(p1, p2), om, t + dt)

    return (
        combine(plain, b1p, b2p, b3p, b4p, mean_p),
        combine(tilde, b1t, b2t, b3t, b4t, mean_t),
    )


def uniformize(state: SheetState, tol: float = 1e-8, max_passes: int = 6) -> SheetState:
    """Resample so |z_alpha| is constant in alpha.

    Newton-inverts the arclength function on the trigonometric interpolant;
    the strength moves as a density so circulation on any material segment is
    preserved. Several passes may be needed because resampling changes the
    discrete speed slightly.
    """
    cur = state
    mean0 = float(np.mean(state.omega))
    for _ in range(max_passes):
        curve = cur.curve
        spread = float(np.max(curve.speed) - np.min(curve.speed)) / curve.A
        if spread < tol:
            return cur
        alpha = curve.grid.nodes
        A = curve.A
        per = mean_free_antiderivative(curve.speed)
        per0 = per[0]
        phi = alpha.copy()
        ok = False
        for _ in range(50):
            g = A * (phi - alpha) + trig_interpolate(per, phi) - per0
            sp = trig_interpolate(curve.speed, phi)
            step = g / sp
            phi -= np.clip(step, -0.5, 0.5)
            if np.max(np.abs(g)) < 1e-13 * max(A, 1.0):
                ok = True
                break
        if not ok:
            raise IllConditionedError("arclength reparametrization failed to converge")
        new_p1 = trig_interpolate(curve.p1, phi)
        if curve.domain == "plain":
            new_p1 = new_p1 + (phi - alpha)
        new_p2 = trig_interpolate(curve.p2, phi)
        sp = trig_interpolate(curve.speed, phi)
        new_om = trig_interpolate(cur.omega, phi) * (A / sp)
        new_om = new_om + (mean0 - np.mean(new_om))
        cur = SheetState(InterfaceCurve(curve.grid, curve.domain, new_p1, new_p2), new_om, cur.t)
    return cur


@dataclass
class RunResult:
    state: SheetState
    halt: str
    steps: int
    records: list = field(default_factory=list)


def run(
    state: SheetState,
    tau: float,
    t_end: float,
    dt: float | None = None,
    dt_policy: str = "cfl",
    params: dict | None = None,
    f_factor: float = 50.0,
    q_min: float = 1e-5,
    gauge_tol: float = 1e-6,
    detect_every: int = 10,
    record_every: int = 10,
    on_record=None,
    max_steps: int = 1_000_000,
) -> RunResult:
    """March the sheet until t_end or a geometric stopping event.

    Halt reasons: "t_end", "self-intersection" (a refined contact exists),
    "arc-chord" (ratio grew past f_factor times its initial value without a
    confirmed contact), "q-distance" (tilde curve approached a marked point),
    "blow-up" (the step produced non-finite values; the last finite state is
    returned).
    """
    if dt_policy not in ("cfl", "fixed"):
        raise ValueError("dt_policy must be 'cfl' or 'fixed'")
    if dt_policy == "fixed" and not dt:
        raise ValueError("fixed stepping needs a dt")
    state = uniformize(state)
    F0 = arc_chord(state.curve).value
    records = []

    def record(s, bundle):
        if on_record is not None:
            on_record(s, bundle)
        records.append((s, bundle))

    halt = "t_end"
    steps = 0
    guess = None
    close_mode = False
    bundle = evaluate_rhs(state, tau, params)
    record(state, bundle)
    while state.t < t_end - 1e-14 and steps < max_steps:
        h = cfl_dt(state.curve, tau) if dt_policy == "cfl" else dt
        h = min(h, t_end - state.t)
        try:
            new_state, _ = step_rk4(state, h, tau, params, first_bundle=bundle)
        except (BlowUpError, IllConditionedError):
            halt = "blow-up"
            break
        state = new_state
        steps += 1

        # a numerically dying sheet often fails the reparametrization or the
        # strength solve before any array goes non-finite; treat both as the
        # same stopping event and hand back the last finite state
        try:
            spread = (
                float(np.max(state.curve.speed) - np.min(state.curve.speed)) / state.curve.A
            )
            if spread > gauge_tol:
                state = uniformize(state)
            bundle = evaluate_rhs(state, tau, params, omega_t_guess=guess)
        except (BlowUpError, IllConditionedError):
            halt = "blow-up"
            break
        check = close_mode or steps % detect_every == 0 or state.t >= t_end - 1e-14
        guess = bundle.omega_t
        if check:
            h_phys = 2.0 * np.pi * state.curve.A / state.grid.n
            if not close_mode and min_pair_distance(state.curve) < 5.0 * h_phys:
                close_mode = True
            if state.curve.domain == "tilde":
                qd = q_point_distances(state.curve.z)
                if float(np.min(qd)) < q_min:
                    halt = "q-distance"
                    record(state, bundle)
                    return RunResult(state, halt, steps, records)
            ac = arc_chord(state.curve)
            if ac.value > f_factor * F0 or not np.isfinite(ac.value):
                contacts = self_intersections(state.curve)
                halt = "self-intersection" if contacts else "arc-chord"
                record(state, bundle)
                return RunResult(state, halt, steps, records)
        if steps % record_every == 0 or state.t >= t_end - 1e-14:
            record(state, bundle)
    return RunResult(state, halt, steps, records)
