"""Conformal desingularization of the periodic fluid domain.

The square-root tangent map

    P(w) = (tan(w/2))**(1/2)

sends one period of the fluid region to a bounded region of the plane. It is
2*pi-periodic, so a physical interface (first coordinate growing by 2*pi per
period) becomes a closed curve. The branch is fixed by the deep-water limit:
as Im w -> -infinity, tan(w/2) -> -i and we take the root near exp(3i*pi/4).

The inverse is elementary, P^{-1}(zeta) = 2*arctan(zeta**2), up to the choice
of the arctan branch, which we resolve by continuity along the curve plus a
global 2*pi shift that keeps the curve aligned with its parameter.

Five marked points control the geometry: the image of the point at infinite
depth and its reflections, namely zeta = 0 and the four fourth roots of -1.
The map degenerates there (P^{-1} has a critical point or pole), so every
routine that divides by 1 + zeta**4 guards against close approaches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import InterfaceCurve
from .errors import BranchCutError, SingularConfigurationError, SingularPointError

ROOT2 = np.sqrt(2.0)

# zeta = 0 first, then the fourth roots of -1 in counterclockwise order
# starting in the first quadrant.
Q_POINTS = np.array(
    [0.0, (1 + 1j) / ROOT2, (-1 + 1j) / ROOT2, (-1 - 1j) / ROOT2, (1 - 1j) / ROOT2]
)

# Branch target at infinite depth: -exp(-i*pi/4) = exp(3i*pi/4).
DEEP_WATER_LIMIT = (-1 + 1j) / ROOT2

_Q_GUARD = 1e-10


def q_point_distances(zeta: np.ndarray) -> np.ndarray:
    """Minimum distance from the sampled points to each marked point."""
    zeta = np.asarray(zeta, dtype=complex)
    return np.array([np.min(np.abs(zeta - q)) for q in Q_POINTS])


def _guard_q_points(zeta: np.ndarray, where: str):
    d = q_point_distances(zeta)
    if np.min(d) < _Q_GUARD:
        raise SingularPointError(
            f"{where}: curve passes within {np.min(d):.3e} of a marked point"
        )


def _nearest_root(tan_val: complex, prev: complex) -> complex:
    p = np.sqrt(tan_val)
    return p if abs(p - prev) <= abs(p + prev) else -p


def map_points(w: np.ndarray) -> np.ndarray:
    """Branch-tracked image of one period of an interface, deepest node first.

    `w` holds the complex nodes of a plain curve (Re w grows by 2*pi per
    period). The branch is seeded on a vertical segment dropped from the
    deepest node, which stays inside the fluid, and then propagated along the
    curve by nearest-root continuation. Raises BranchCutError when the
    continuation is ambiguous or fails to close up.
    """
    w = np.asarray(w, dtype=complex)
    n = w.size
    tan_all = np.tan(w / 2.0)
    if not np.all(np.isfinite(tan_all)) or np.max(np.abs(tan_all)) > 1e8:
        raise SingularConfigurationError("interface passes through a pole of the map")
    if np.min(np.abs(tan_all)) < 1e-18:
        raise SingularPointError("interface passes through the origin of the image plane")

    i0 = int(np.argmin(w.imag))
    depths = np.concatenate([np.geomspace(50.0, 1.0, 400), np.linspace(1.0, 0.0, 401)[1:]])
    val = DEEP_WATER_LIMIT
    for s in depths:
        val = _nearest_root(np.tan((w[i0] - 1j * s) / 2.0), val)

    zeta = np.empty(n, dtype=complex)
    zeta[i0] = _nearest_root(tan_all[i0], val)
    order = [(i0 + j) % n for j in range(1, n)]
    prev = zeta[i0]
    for j in order:
        cur = _nearest_root(tan_all[j], prev)
        jump = np.angle(cur / prev)
        if abs(jump) > np.pi / 2:
            raise BranchCutError(
                f"branch continuation ambiguous between nodes (turn {jump:.3f} rad); "
                "refine the curve"
            )
        zeta[j] = cur
        prev = cur
    closing = _nearest_root(tan_all[i0], prev)
    if abs(closing - zeta[i0]) > 0.5 * abs(zeta[i0]):
        raise BranchCutError("branch continuation does not close up around the period")
    return zeta


def unmap_points(zeta: np.ndarray) -> np.ndarray:
    """Preimage of a closed curve, unwrapped to advance by +2*pi per period."""
    zeta = np.asarray(zeta, dtype=complex)
    _guard_q_points(zeta, "unmap_points")
    n = zeta.size
    w = 2.0 * np.arctan(zeta**2)
    for j in range(1, n):
        w[j] += 2.0 * np.pi * np.round((w[j - 1].real - w[j].real) / (2.0 * np.pi))
        if abs(w[j] - w[j - 1]) > np.pi / 2:
            raise BranchCutError("preimage steps too large to resolve the arctan branch")
    winding = int(np.round((w[-1].real - w[0].real) / (2.0 * np.pi)))
    if winding != 1 or abs(w[0] + 2.0 * np.pi - w[-1]) > np.pi / 2:
        raise BranchCutError("preimage does not wind forward by one period")
    alpha = -np.pi + 2.0 * np.pi * np.arange(n) / n
    shift = 2.0 * np.pi * np.round(np.mean(w.real - alpha) / (2.0 * np.pi))
    return w - shift


def tilde_from_plain(curve: InterfaceCurve) -> InterfaceCurve:
    """Image of a plain interface under the desingularizing map."""
    if curve.domain != "plain":
        raise ValueError("tilde_from_plain expects a plain-domain curve")
    zeta = map_points(curve.z)
    return InterfaceCurve(curve.grid, "tilde", zeta.real, zeta.imag)


def plain_from_tilde(curve: InterfaceCurve) -> InterfaceCurve:
    """Preimage of a closed tilde interface in the physical domain."""
    if curve.domain != "tilde":
        raise ValueError("plain_from_tilde expects a tilde-domain curve")
    w = unmap_points(curve.z)
    return InterfaceCurve.from_absolute(curve.grid, "plain", w.real, w.imag)


@dataclass
class MapJet:
    """First and second derivatives of the inverse map along a tilde curve.

    With W(zeta) = 2*arctan(zeta**2):
      a  = W'(zeta)   = 4 zeta / (1 + zeta^4)
      b  = W''(zeta)  = 4 (1 - 3 zeta^4) / (1 + zeta^4)^2
      bp = W'''(zeta) = 16 zeta^3 (3 zeta^4 - 5) / (1 + zeta^4)^3
      Q  = 1/|a|      (magnification |P'| of the forward map on the curve)
      G  = (Im(conj(a) b), Re(conj(a) b)), the gradient direction of Q:
           grad Q = Q^3 * (-G2, G1).
    """

    zeta: np.ndarray
    a: np.ndarray
    b: np.ndarray
    bp: np.ndarray
    Q: np.ndarray
    G: np.ndarray  # shape (n, 2), columns (G1, G2)

    @property
    def ab(self) -> np.ndarray:
        """conj(a) * b = G2 + i G1."""
        return np.conj(self.a) * self.b

    def Q_alpha(self, zeta_a: np.ndarray) -> np.ndarray:
        """d/dalpha of Q along the curve with tangent zeta_a."""
        t1, t2 = zeta_a.real, zeta_a.imag
        return self.Q**3 * (-self.G[:, 1] * t1 + self.G[:, 0] * t2)

    def hess1_contract(self, h: np.ndarray) -> np.ndarray:
        """h^T Hess(W1) h for a complex direction h."""
        t1, t2 = h.real, h.imag
        return self.b.real * (t1 * t1 - t2 * t2) - 2.0 * self.b.imag * t1 * t2

    def hess2_contract(self, h: np.ndarray) -> np.ndarray:
        """h^T Hess(W2) h for a complex direction h."""
        t1, t2 = h.real, h.imag
        return 2.0 * self.b.real * t1 * t2 + self.b.imag * (t1 * t1 - t2 * t2)

    def dG(self, h: np.ndarray) -> np.ndarray:
        """Directional derivative of G2 + i G1 along the complex direction h."""
        return np.abs(self.b) ** 2 * np.conj(h) + np.conj(self.a) * self.bp * h


def identity_jet(n: int) -> MapJet:
    """Jet of the identity map; reduces tilde formulas to plain ones."""
    ones = np.ones(n, dtype=complex)
    zeros = np.zeros(n, dtype=complex)
    return MapJet(
        zeta=zeros,
        a=ones,
        b=zeros,
        bp=zeros,
        Q=np.ones(n),
        G=np.zeros((n, 2)),
    )


def map_jet(zeta: np.ndarray) -> MapJet:
    """Evaluate the inverse-map jet at the given tilde points."""
    zeta = np.asarray(zeta, dtype=complex)
    _guard_q_points(zeta, "map_jet")
    z4 = zeta**4
    den = 1.0 + z4
    a = 4.0 * zeta / den
    b = 4.0 * (1.0 - 3.0 * z4) / den**2
    bp = 16.0 * zeta**3 * (3.0 * z4 - 5.0) / den**3
    Q = 1.0 / np.abs(a)
    ab = np.conj(a) * b
    G = np.stack([ab.imag, ab.real], axis=-1)
    return MapJet(zeta=zeta, a=a, b=b, bp=bp, Q=Q, G=G)


def jet_for_curve(curve: InterfaceCurve) -> MapJet:
    if curve.domain != "tilde":
        raise ValueError("map jets are evaluated on tilde-domain curves")
    return map_jet(curve.z)
