"""Birkhoff-Rott integrals for periodic vortex sheets.

The sheet velocity in complex form is

    u - i v = (1/(2 pi i)) PV int omega(a') K(z(a), z(a')) da'

with K = (1/2) cot((z - z')/2) in the physical domain (the periodized
Cauchy kernel). Mapped-domain curves need one more ingredient: the square
root in the map covers the fluid strip twice, so the full image of the
water region is bounded by the mapped curve together with its reflection
through the origin, and both copies carry the circulation of the physical
sheet. The mapped kernel is therefore

    K = 1/(z - z') + 1/(z + z')

with the reflected copy entering at the same density. Dropping the
reflected term perturbs the induced field by a smooth error of the size of
omega that no resolution can remove; with it, the mapped field is the exact
conformal image of the physical one.

On-curve principal values use the alternate-point trapezoid rule, which is
spectrally accurate and skips the singular diagonal entirely. The same
stencil covers the reflected term: when the interface touches itself the
two mapped arcs sit at reflected positions, the label-symmetric contacts
used here land at even label offset, and the alternate points straddle them
in cancelling pairs, which is what keeps contact configurations computable
in the mapped domain. A kernel-split evaluator with the same accuracy is
provided as an independent cross-check.

Strengths are densities with respect to the parameter: d(circulation) =
omega da.

A sheet integral defines a velocity field on both sides of the curve, but
only the water side is physical; the other side is an artifact of the
representation. Circulation density is invariant under conformal relabeling
of the water region, so a curve and its map image carry the same strength
at matched parameters, and the parameter-weighted normal velocity
<v, z_alpha-perp> then agrees pointwise between the two frames.
solve_omega_from_normal_velocity recovers a strength from normal data;
matched_tilde_state / matched_plain_state use it to rebuild a state's
strength on the other side of the map, which reproduces the transported
values up to the strength-solve floor and so serves as an independent
consistency check on the data.
"""

from __future__ import annotations

import numpy as np

from .conformal import plain_from_tilde, tilde_from_plain
from .curves import InterfaceCurve, SheetState
from .errors import IllConditionedError, TooCloseToCurveError
from .spectral import PeriodicGrid, fourier_derivative, hilbert_transform, resample

_ODD_CACHE: dict[int, np.ndarray] = {}


def _odd_mask(n: int) -> np.ndarray:
    mask = _ODD_CACHE.get(n)
    if mask is None:
        idx = np.arange(n)
        mask = (idx[:, None] - idx[None, :]) % 2 == 1
        _ODD_CACHE[n] = mask
    return mask


def _pair_differences(curve: InterfaceCurve):
    z = curve.z
    return z[:, None] - z[None, :]


def _kernel_matrix(curve: InterfaceCurve) -> np.ndarray:
    """K_ij on the alternate-point stencil, zero elsewhere."""
    n = curve.grid.n
    odd = _odd_mask(n)
    dz = np.where(odd, _pair_differences(curve), 1.0)
    if curve.domain == "plain":
        K = 0.5 / np.tan(0.5 * dz)
    else:
        z = curve.z
        sz = np.where(odd, z[:, None] + z[None, :], 1.0)
        K = 1.0 / dz + 1.0 / sz
    return np.where(odd, K, 0.0)


def _velocity(W: np.ndarray) -> np.ndarray:
    return np.stack([W.real, -W.imag], axis=-1)


def br_eval(curve: InterfaceCurve, omega: np.ndarray) -> np.ndarray:
    """Sheet velocity at the nodes, shape (n, 2)."""
    n = curve.grid.n
    W = (-2.0j / n) * (_kernel_matrix(curve) @ np.asarray(omega, dtype=float))
    return _velocity(W)


def br_eval_split(curve: InterfaceCurve, omega: np.ndarray) -> np.ndarray:
    """Sheet velocity via explicit singularity split.

    The kernel is written as a smooth part, integrated by the full trapezoid
    rule with its analytic diagonal limit, plus the periodized pole, which
    becomes a Hilbert transform; in the mapped domain the reflected-copy
    term is smooth on its own and joins the trapezoid part. Requires a curve
    whose arcs stay clear of each other (and, mapped, of the reflected
    copy); agrees with br_eval to spectral accuracy and serves as an
    independent check.
    """
    omega = np.asarray(omega, dtype=float)
    n = curve.grid.n
    beta = curve.grid.nodes
    dz = _pair_differences(curve)
    eye = np.eye(n, dtype=bool)
    dzs = np.where(eye, 1.0, dz)
    K = 0.5 / np.tan(0.5 * dzs) if curve.domain == "plain" else 1.0 / dzs
    db = beta[:, None] - beta[None, :]
    pole = 1.0 / (curve.za[:, None] * 2.0 * np.tan(np.where(eye, 1.0, db) / 2.0))
    C = np.where(eye, (curve.zaa / (2.0 * curve.za**2))[:, None] * np.ones(n), K - pole)
    if curve.domain == "tilde":
        z = curve.z
        C = C + 1.0 / (z[:, None] + z[None, :])
    W = (-1.0j / n) * (C @ omega) - 1.0j * hilbert_transform(omega) / (2.0 * curve.za)
    return _velocity(W)


def br_eval_offcurve(curve: InterfaceCurve, omega: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Velocity induced at points away from the sheet, shape (m, 2).

    Points must be complex and keep a clearance of five grid spacings of
    arclength from every node (counting periodic images in the physical
    domain and the reflected copy in the mapped one); closer evaluations
    would need desingularized quadrature.
    """
    omega = np.asarray(omega, dtype=float)
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    n = curve.grid.n
    z = curve.z
    dz = pts[:, None] - z[None, :]
    if curve.domain == "plain":
        shifted = np.abs(dz[..., None] + 2.0 * np.pi * np.array([-1.0, 0.0, 1.0]))
        dist = np.min(shifted)
    else:
        sz = pts[:, None] + z[None, :]
        dist = min(np.min(np.abs(dz)), np.min(np.abs(sz)))
    clearance = 5.0 * curve.grid.spacing * curve.A
    if dist <= clearance:
        raise TooCloseToCurveError(
            f"evaluation point within {dist:.3e} of the sheet (need > {clearance:.3e})"
        )
    K = 0.5 / np.tan(0.5 * dz) if curve.domain == "plain" else 1.0 / dz + 1.0 / sz
    W = (-1.0j / n) * (K @ omega)
    return _velocity(W)


def br_t_explicit(curve: InterfaceCurve, omega: np.ndarray, zdot: np.ndarray) -> np.ndarray:
    """Time derivative of br_eval from the motion of the curve alone.

    zdot holds the nodal velocities as an (n, 2) array. The strength is held
    fixed; the contribution of a changing omega enters through br_eval with
    omega_t and is handled by the caller.
    """
    omega = np.asarray(omega, dtype=float)
    zdot = np.asarray(zdot, dtype=float)
    zd = zdot[:, 0] + 1j * zdot[:, 1]
    n = curve.grid.n
    odd = _odd_mask(n)
    dz = np.where(odd, _pair_differences(curve), 1.0)
    dzd = zd[:, None] - zd[None, :]
    if curve.domain == "plain":
        M = -dzd / (4.0 * np.sin(0.5 * dz) ** 2)
    else:
        z = curve.z
        sz = np.where(odd, z[:, None] + z[None, :], 1.0)
        szd = zd[:, None] + zd[None, :]
        M = -dzd / dz**2 - szd / sz**2
    M = np.where(odd, M, 0.0)
    W = (-2.0j / n) * (M @ omega)
    return _velocity(W)


def transport_matrix(curve: InterfaceCurve) -> np.ndarray:
    """Dense matrix of omega -> 2 br_eval(curve, omega) . z_alpha."""
    n = curve.grid.n
    K = _kernel_matrix(curve)
    za1, za2 = curve.za.real, curve.za.imag
    return (4.0 / n) * (K.imag * za1[:, None] + K.real * za2[:, None])


def solve_omega_t(
    curve: InterfaceCurve,
    rhs: np.ndarray,
    omega_t0: np.ndarray | None = None,
    smoother=None,
    tol: float = 1e-11,
    max_iter: int = 60,
) -> np.ndarray:
    """Solve omega_t + S[2 br_eval(curve, omega_t) . z_alpha] = rhs.

    S is an optional field smoother (identity when None). Fixed-point
    iteration with an optional warm start; falls back to a dense solve when
    the iteration stalls. Raises IllConditionedError if even the dense system
    cannot meet the tolerance.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = curve.grid.n
    za = curve.za

    def apply_T(w):
        vel = br_eval(curve, w)
        out = 2.0 * (vel[:, 0] * za.real + vel[:, 1] * za.imag)
        return smoother(out) if smoother is not None else out

    w = rhs.copy() if omega_t0 is None else np.asarray(omega_t0, dtype=float).copy()
    scale = max(1.0, float(np.max(np.abs(rhs))))
    best = None
    best_res = np.inf
    for _ in range(max_iter):
        res = w + apply_T(w) - rhs
        r = float(np.max(np.abs(res)))
        if r < best_res:
            best, best_res = w.copy(), r
        if r < tol * scale:
            return w
        w = rhs - apply_T(w)

    T = transport_matrix(curve)
    if smoother is not None:
        T = np.column_stack([smoother(T[:, j]) for j in range(n)])
    w = np.linalg.solve(np.eye(n) + T, rhs)
    res = float(np.max(np.abs(w + apply_T(w) - rhs)))
    if res > 1e3 * tol * scale:
        if best_res < res:
            w, res = best, best_res
        if res > 1e3 * tol * scale:
            raise IllConditionedError(
                f"strength-derivative system residual {res:.3e} exceeds tolerance"
            )
    return w


def br_normal(curve: InterfaceCurve, omega: np.ndarray) -> np.ndarray:
    """Normal component of the sheet velocity against z_alpha-perp.

    This parameter-weighted normal velocity is the map-invariant face of the
    flow: it agrees pointwise between a physical curve and its image at
    matched parameters and matched strength, because the conformal factor of
    the map cancels against the stretching of z_alpha-perp. The agreement is
    exact at the level of the fields; discretely it holds to quadrature
    accuracy, which for well-separated arcs means machine precision.
    """
    vel = br_eval(curve, omega)
    za = curve.za
    return vel[:, 1] * za.real - vel[:, 0] * za.imag


def _normal_matrix(curve: InterfaceCurve) -> np.ndarray:
    """Dense matrix of omega -> br_normal(curve, omega)."""
    n = curve.grid.n
    return (2.0 / n) * np.real(curve.za[:, None] * _kernel_matrix(curve))


def solve_omega_from_normal_velocity(
    curve: InterfaceCurve,
    target: np.ndarray,
    mean: float = 0.0,
    tol: float = 1e-12,
    max_iter: int = 80,
) -> np.ndarray:
    """Strength whose sheet velocity has the given normal component.

    Solves br_normal(curve, omega) = target. Two components of the target
    are unreachable and are projected off before solving: the mean (the
    induced field is divergence free, so the net flux through the curve
    vanishes) and the Nyquist mode, to which the alternate-point quadrature
    is structurally blind. The same two components of the strength are pure
    gauge here and get pinned, the mean to `mean` and the Nyquist
    coefficient to zero. The operator's symbol at high frequency is +-H/2
    depending on orientation, so a Hilbert-preconditioned fixed point
    contracts rapidly; a dense least-squares solve is the fallback. Raises
    IllConditionedError when the projected residual cannot be met.
    """
    target = np.asarray(target, dtype=float)
    n = curve.grid.n
    alt = np.cos(np.pi * np.arange(n))
    target = target - np.mean(target) - alt * (float(alt @ target) / n)
    scale = max(1.0, float(np.max(np.abs(target))))

    # orientation probe: project N[cos(m a)] on H[cos(m a)]/2 at a high mode
    m = n // 4
    probe = np.cos(m * curve.grid.nodes)
    ref = 0.5 * hilbert_transform(probe)
    sign = 1.0 if float(np.dot(br_normal(curve, probe), ref)) >= 0.0 else -1.0

    w = np.full(n, float(mean))
    best, best_res = w.copy(), np.inf
    for _ in range(max_iter):
        res = br_normal(curve, w) - target
        r = float(np.max(np.abs(res)))
        if r < best_res:
            best, best_res = w.copy(), r
        if r < tol * scale:
            return w
        w = w + 2.0 * sign * hilbert_transform(res)

    M = np.vstack([_normal_matrix(curve), np.full((1, n), 1.0 / n), alt[None, :] / n])
    rhs = np.concatenate([target, [float(mean)], [0.0]])
    w = np.linalg.lstsq(M, rhs, rcond=None)[0]
    res = float(np.max(np.abs(br_normal(curve, w) - target)))
    if res > best_res:
        w, res = best, best_res
    if res > 1e3 * tol * scale:
        raise IllConditionedError(
            f"normal-velocity system residual {res:.3e} exceeds tolerance"
        )
    return w


def _invariant_target(state: SheetState, refine: int) -> np.ndarray:
    """br_normal of the state, with optional quadrature refinement.

    refine > 1 resamples curve and strength to refine * n nodes, evaluates
    the normal data there, and keeps every refine-th value (the labels of
    the fine grid contain the coarse ones). The alternate-point rule loses
    accuracy geometrically when two arcs pass within a few node spacings of
    each other; refinement restores it without changing the state.
    """
    if refine <= 1:
        return br_normal(state.curve, state.omega)
    m = refine * state.curve.grid.n
    fine = InterfaceCurve(
        PeriodicGrid(m),
        state.curve.domain,
        resample(state.curve.p1, m),
        resample(state.curve.p2, m),
    )
    return br_normal(fine, resample(state.omega, m))[::refine]


def matched_tilde_state(
    state: SheetState, tol: float = 1e-12, refine: int = 1
) -> SheetState:
    """Mapped-domain twin of a physical-domain sheet state, by re-solve.

    The curve is mapped pointwise; the strength is re-solved from the
    invariant br_normal data rather than copied, so the result checks the
    transported values instead of assuming them. The strength mean carries
    over as the gauge. tol is forwarded to the strength solve and refine to
    the normal-data quadrature; raise both for curves with nearly touching
    arcs.
    """
    if state.curve.domain != "plain":
        raise ValueError("matched_tilde_state expects a physical-domain state")
    target = _invariant_target(state, refine)
    image = tilde_from_plain(state.curve)
    omega = solve_omega_from_normal_velocity(
        image, target, mean=float(np.mean(state.omega)), tol=tol
    )
    return SheetState(image, omega, state.t)


def matched_plain_state(
    state: SheetState, tol: float = 1e-12, refine: int = 1
) -> SheetState:
    """Physical-domain twin of a mapped-domain sheet state.

    Inverse of matched_tilde_state: requires the mapped curve to invert
    cleanly (non-self-intersecting physical image with the tracked branch).
    """
    if state.curve.domain != "tilde":
        raise ValueError("matched_plain_state expects a mapped-domain state")
    target = _invariant_target(state, refine)
    image = plain_from_tilde(state.curve)
    omega = solve_omega_from_normal_velocity(
        image, target, mean=float(np.mean(state.omega)), tol=tol
    )
    return SheetState(image, omega, state.t)
