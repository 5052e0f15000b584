"""Interface curves, vortex-sheet states, and intrinsic geometry checks.

A curve is stored through its periodic components. In the physical ("plain")
domain the first coordinate grows by 2*pi per period, so we store
p1 = z1 - alpha; in the mapped ("tilde") domain the curve is closed and p1 is
the coordinate itself. All derived quantities (tangent, curvature, arclength
factor) are spectral and cached at construction; curves are treated as
immutable once built.

The arc-chord ratio and the self-intersection search live here rather than
with the physics diagnostics because the time stepper needs them to decide
when to halt.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .spectral import PeriodicGrid, fourier_derivative, integral, trig_interpolate

DOMAINS = ("plain", "tilde")


@dataclass
class InterfaceCurve:
    grid: PeriodicGrid
    domain: str
    p1: np.ndarray
    p2: np.ndarray
    za: np.ndarray = field(init=False, repr=False)
    zaa: np.ndarray = field(init=False, repr=False)
    speed: np.ndarray = field(init=False, repr=False)
    A: float = field(init=False)

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        self.p1 = np.asarray(self.p1, dtype=float)
        self.p2 = np.asarray(self.p2, dtype=float)
        n = self.grid.n
        if self.p1.shape != (n,) or self.p2.shape != (n,):
            raise ValueError("curve components must match the grid size")
        if not (np.all(np.isfinite(self.p1)) and np.all(np.isfinite(self.p2))):
            raise ValueError("curve components contain non-finite values")
        d1 = fourier_derivative(self.p1) + (1.0 if self.domain == "plain" else 0.0)
        d2 = fourier_derivative(self.p2)
        self.za = d1 + 1j * d2
        self.zaa = fourier_derivative(self.p1, 2) + 1j * fourier_derivative(self.p2, 2)
        self.speed = np.abs(self.za)
        self.A = integral(self.speed) / (2.0 * np.pi)

    @classmethod
    def from_absolute(cls, grid: PeriodicGrid, domain: str, z1: np.ndarray, z2: np.ndarray):
        """Build from absolute coordinates; plain curves subtract the nodes."""
        z1 = np.asarray(z1, dtype=float)
        p1 = z1 - grid.nodes if domain == "plain" else z1
        return cls(grid, domain, p1, np.asarray(z2, dtype=float))

    @property
    def z(self) -> np.ndarray:
        """Absolute positions as complex numbers, one period."""
        x = self.p1 + self.grid.nodes if self.domain == "plain" else self.p1
        return x + 1j * self.p2

    @property
    def curvature(self) -> np.ndarray:
        return np.imag(np.conj(self.za) * self.zaa) / self.speed**3

    def with_components(self, p1: np.ndarray, p2: np.ndarray) -> "InterfaceCurve":
        return InterfaceCurve(self.grid, self.domain, p1, p2)


@dataclass
class SheetState:
    """A curve together with its vortex-sheet strength at time t."""

    curve: InterfaceCurve
    omega: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.omega = np.asarray(self.omega, dtype=float)
        if self.omega.shape != (self.curve.grid.n,):
            raise ValueError("omega must match the grid size")
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("omega contains non-finite values")
        scale = max(1.0, float(np.max(np.abs(self.omega))))
        if abs(float(np.mean(self.omega))) > 1e-8 * scale:
            warnings.warn("sheet strength has a nonzero mean; circulation will drift", stacklevel=2)

    @property
    def grid(self) -> PeriodicGrid:
        return self.curve.grid


def perp(v: np.ndarray) -> np.ndarray:
    """Rotate vectors by +90 degrees: (x, y) -> (-y, x)."""
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _image_shifts(curve: InterfaceCurve) -> np.ndarray:
    if curve.domain == "plain":
        return np.array([-2.0 * np.pi, 0.0, 2.0 * np.pi])
    return np.array([0.0])


def _pair_geometry(curve: InterfaceCurve):
    """Parameter offsets and chords of every node pair against each image.

    Entry [k, i, j] compares node i with the k-th periodic image of node j,
    the parameter offset shifted consistently with the chord. Plain curves
    carry the three shifts -2pi, 0, 2pi: a doubled-back curve can touch
    itself within one period at large parameter separation, and can touch a
    neighboring image as well, so both kinds of pair must stay visible.
    Closed mapped curves have the single zero shift.
    """
    a = curve.grid.nodes
    da = a[:, None] - a[None, :]
    z = curve.z
    chord0 = z[:, None] - z[None, :]
    shifts = _image_shifts(curve)
    if curve.domain == "plain":
        beta = da[None, :, :] - shifts[:, None, None]
        chord = chord0[None, :, :] - shifts[:, None, None]
    else:
        # closed curve: parameter distance is circular, chord is as drawn
        beta = (da - 2.0 * np.pi * np.round(da / (2.0 * np.pi)))[None, :, :]
        chord = chord0[None, :, :]
    return beta, chord, shifts


@dataclass
class ArcChord:
    """Largest parameter-to-chord ratio and where it occurs."""

    value: float
    i: int
    j: int


def arc_chord(curve: InterfaceCurve, exclude=(), half_width: float = 0.0) -> ArcChord:
    """Max over node pairs and images of |offset| / |chord|; diagonal is 1/|z_a|.

    An exact coincidence of distinct nodes returns inf at that pair. Pairs
    whose parameters both fall within half_width of an excluded (a1, a2)
    contact (in either order) are skipped, which measures the ratio away from
    a known touch point.
    """
    n = curve.grid.n
    beta, chord, shifts = _pair_geometry(curve)
    dist = np.abs(chord)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = np.abs(beta) / dist
    k0 = int(np.argmin(np.abs(shifts)))
    np.fill_diagonal(F[k0], 1.0 / curve.speed)
    F = np.where(np.isnan(F), np.inf, F)
    if half_width > 0.0:
        a = curve.grid.nodes
        for pa, pb in exclude:
            wa = np.abs((a - pa + np.pi) % (2.0 * np.pi) - np.pi) < half_width
            wb = np.abs((a - pb + np.pi) % (2.0 * np.pi) - np.pi) < half_width
            mask = (wa[:, None] & wb[None, :]) | (wb[:, None] & wa[None, :])
            F = np.where(mask[None, :, :], 0.0, F)
    _, i, j = np.unravel_index(int(np.argmax(F)), F.shape)
    return ArcChord(float(F.max()), int(i), int(j))


def min_pair_distance(curve: InterfaceCurve, clearance_nodes: int = 5) -> float:
    """Smallest chord between nodes at least clearance_nodes apart in index.

    Plain curves measure each pair against the nearest periodic image, so an
    approach between a node and a neighboring copy of the curve counts.
    """
    n = curve.grid.n
    _, chord, _ = _pair_geometry(curve)
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :]) % n
    sep = np.minimum(sep, n - sep)
    dist = np.where(sep >= clearance_nodes, np.abs(chord).min(axis=0), np.inf)
    return float(np.min(dist))


@dataclass
class Contact:
    """A refined self-intersection: parameters, location, and extent."""

    alpha1: float
    alpha2: float
    point: tuple[float, float]
    arc: bool = False


def _newton_contact(curve, a1, a2, shift, spacing):
    p1, p2 = curve.p1, curve.p2
    nodes_term = curve.domain == "plain"
    d1s, d2s = np.real(curve.za), np.imag(curve.za)
    for _ in range(30):
        z1 = trig_interpolate(p1, np.array([a1, a2]))
        z2 = trig_interpolate(p2, np.array([a1, a2]))
        if nodes_term:
            z1 = z1 + np.array([a1, a2])
        rx = z1[0] - z1[1] - shift
        ry = z2[0] - z2[1]
        if abs(rx) < 1e-11 and abs(ry) < 1e-11:
            return a1, a2, (float(z1[0]), float(z2[0]))
        d1 = trig_interpolate(d1s, np.array([a1, a2]))
        d2 = trig_interpolate(d2s, np.array([a1, a2]))
        J = np.array([[d1[0], -d1[1]], [d2[0], -d2[1]]])
        det = np.linalg.det(J)
        if abs(det) < 1e-14:
            return None
        step = np.linalg.solve(J, np.array([rx, ry]))
        if np.max(np.abs(step)) > 2.0 * spacing:
            step *= 2.0 * spacing / np.max(np.abs(step))
        a1 -= step[0]
        a2 -= step[1]
    return None


def _circ_gap(x: float, y: float) -> float:
    return abs((x - y + np.pi) % (2.0 * np.pi) - np.pi)


def self_intersections(curve: InterfaceCurve, clearance_nodes: int = 5) -> list[Contact]:
    """Find crossings or touch points of the interface with itself.

    Node pairs closer in space than a few grid spacings (but well separated
    in parameter) seed a Newton search for z(a1) = z(a2), each candidate
    periodic image of the pair seeding its own search in the physical domain.
    Coincident-node pairs (splat-type contact) are accepted directly.
    Refined pairs are chained into clusters on the parameter torus, treating
    (a1, a2) and (a2, a1) as the same pair; a cluster spanning more than four
    grid spacings is flagged as an arc.
    """
    n = curve.grid.n
    h = curve.grid.spacing
    _, chord, shifts = _pair_geometry(curve)
    dist = np.abs(chord)
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :]) % n
    sep = np.minimum(sep, n - sep)
    eligible = (sep >= clearance_nodes) & (idx[:, None] < idx[None, :])
    near = eligible[None, :, :] & (dist < 5.0 * h * np.maximum(curve.A, 1e-12))
    # Newton only from seeds that are 2-d local minima of the pair distance
    # (circular in both indices, ineligible neighbors count as far); a flat
    # overlap region survives as ties and near-tangential valleys collapse
    # from an area of seeds to a line.
    padded = np.where(eligible[None, :, :], dist, np.inf)
    for ax in (1, 2):
        for way in (1, -1):
            near &= padded <= np.roll(padded, way, axis=ax)
    found = []
    a = curve.grid.nodes
    z = curve.z
    kk, ii, jj = np.nonzero(near)
    for pos in np.argsort(dist[kk, ii, jj]):
        k, i, j = int(kk[pos]), int(ii[pos]), int(jj[pos])
        if dist[k, i, j] < 1e-9 * max(curve.A, 1e-12):
            found.append((a[i], a[j], (float(z[i].real), float(z[i].imag))))
            continue
        if any(
            max(_circ_gap(a[i], b1), _circ_gap(a[j], b2)) < h
            or max(_circ_gap(a[i], b2), _circ_gap(a[j], b1)) < h
            for b1, b2, _ in found
        ):
            continue
        hit = _newton_contact(curve, a[i], a[j], float(shifts[k]), h)
        if hit is None:
            continue
        b1, b2, pt = hit
        if _circ_gap(b1, b2) < clearance_nodes * h:
            continue
        found.append((b1, b2, pt))
    if not found:
        return []
    wrap = lambda b: (b + np.pi) % (2.0 * np.pi) - np.pi
    items = [(wrap(b1), wrap(b2), pt) for b1, b2, pt in found]
    m = len(items)
    seen = [False] * m
    contacts = []
    for s in range(m):
        if seen[s]:
            continue
        seen[s] = True
        aligned = [items[s]]
        queue = [items[s]]
        # single-linkage chaining on the torus; swapped orientation is the
        # same pair, so align each member with the cluster before storing
        while queue:
            cur = queue.pop()
            for t in range(m):
                if seen[t]:
                    continue
                b1, b2, pt = items[t]
                straight = max(_circ_gap(cur[0], b1), _circ_gap(cur[1], b2))
                crossed = max(_circ_gap(cur[0], b2), _circ_gap(cur[1], b1))
                if min(straight, crossed) > 1.5 * h:
                    continue
                seen[t] = True
                node = (b2, b1, pt) if crossed < straight else (b1, b2, pt)
                aligned.append(node)
                queue.append(node)
        ref = aligned[0][0]
        rel = np.array([(b1 - ref + np.pi) % (2.0 * np.pi) - np.pi
                        for b1, _, _ in aligned])
        span = float(rel.max() - rel.min())
        mid = aligned[int(np.argsort(rel, kind="stable")[len(rel) // 2])]
        b1, b2 = (mid[1], mid[0]) if mid[1] < mid[0] else (mid[0], mid[1])
        contacts.append(Contact(float(b1), float(b2), mid[2], arc=span > 4.0 * h))
    contacts.sort(key=lambda c: (c.alpha1, c.alpha2))
    return contacts
