"""Dynamics on the space of oriented great circles.

An oriented geodesic of the sphere is labeled by its unit normal, so the
space of geodesics is again a sphere. A potential V on the sphere acts on
high-frequency waves through its great-circle averages H = funk_transform(V),
and the induced drift of wave packets is the Hamiltonian flow

    dn/ds = n x grad H(n)

on circle normals. For the triaxial family H = q this is the classic
rigid-body (polhode) system: six equilibria on the coordinate axes, closed
orbits around the low and high axes, and a separatrix through the saddle
axis. This module integrates the flow, classifies and times orbits, and
runs the flow-averaged control check: does every geodesic, transported by
the flow for time at most T, at some point cross a given union of caps?
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .harmonics import HarmonicCoeffs, evaluate_at, rotation_derivative
from .radon import TriaxialForm
from .sphere import PhasePoint, fibonacci_sphere, frame_at

__all__ = [
    "phase_to_normal",
    "normal_to_phase",
    "make_flow_field",
    "flow_field",
    "vflow",
    "orbit_trace",
    "OrbitClass",
    "classify_orbit",
    "separatrix_crossings",
    "orbit_period",
    "geodesic_sees_region",
    "circle_meets_cap_margin",
    "VgccSample",
    "VgccResult",
    "check_vgcc",
]


def phase_to_normal(p):
    """Unit normal of the oriented geodesic through a phase point."""
    return np.cross(p.base, p.dir)


def normal_to_phase(n):
    """A phase point on the oriented geodesic with the given normal.

    Uses the deterministic tangent frame at n, so the choice of starting
    point on the circle is reproducible.
    """
    e1, e2 = frame_at(np.asarray(n, dtype=float) / np.linalg.norm(n))
    return PhasePoint.normalized(e1, e2)


def make_flow_field(hamiltonian):
    """Compile a Hamiltonian into a batched vector field on normals.

    Accepts a TriaxialForm (closed-form field 2 n x (diag n)), arbitrary
    HarmonicCoeffs (field components are rotation derivatives evaluated
    pointwise), or None for the trivial flow. The returned callable maps
    (..., 3) arrays to (..., 3) arrays.
    """
    if hamiltonian is None:

        def field(n):
            return np.zeros_like(np.asarray(n, dtype=float))

        return field
    if isinstance(hamiltonian, TriaxialForm):
        diag = hamiltonian.diag

        def field(n):
            n = np.asarray(n, dtype=float)
            return 2.0 * np.cross(n, n * diag)

        return field
    if isinstance(hamiltonian, HarmonicCoeffs):
        comps = [rotation_derivative(hamiltonian, axis) for axis in range(3)]

        def field(n):
            n = np.asarray(n, dtype=float)
            pts = np.atleast_2d(n)
            X = np.stack([evaluate_at(f, pts).real for f in comps], axis=-1)
            return X if n.ndim > 1 else X[0]

        return field
    raise TypeError("hamiltonian must be TriaxialForm, HarmonicCoeffs, or None")


def flow_field(hamiltonian, n):
    """Flow field at the given normals (convenience wrapper)."""
    return make_flow_field(hamiltonian)(n)


def _rk4_step(field, n, ds):
    k1 = field(n)
    k2 = field(n + 0.5 * ds * k1)
    k3 = field(n + 0.5 * ds * k2)
    k4 = field(n + ds * k3)
    out = n + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def vflow(n0, hamiltonian, s_max, ds=1e-3):
    """Advance normals along the flow for time s_max (batched RK4).

    The step is classical fourth order with renormalization to the sphere
    after each step; s_max is split into equal steps no longer than ds.
    """
    n = np.atleast_2d(np.asarray(n0, dtype=float)).copy()
    if s_max < 0 or ds <= 0:
        raise ValueError("need s_max >= 0 and ds > 0")
    field = make_flow_field(hamiltonian)
    n_steps = max(1, math.ceil(s_max / ds - 1e-12)) if s_max > 0 else 0
    if n_steps:
        h = s_max / n_steps
        for _ in range(n_steps):
            n = _rk4_step(field, n, h)
    return n if np.ndim(n0) > 1 else n[0]


def orbit_trace(n0, hamiltonian, s_max, ds=1e-3, stride=1):
    """Trajectory of one normal: arrays (times, points) with points (k, 3)."""
    n = np.asarray(n0, dtype=float)[None, :].copy()
    field = make_flow_field(hamiltonian)
    n_steps = max(1, math.ceil(s_max / ds - 1e-12))
    h = s_max / n_steps
    times = [0.0]
    points = [n[0].copy()]
    for i in range(1, n_steps + 1):
        n = _rk4_step(field, n, h)
        if i % stride == 0 or i == n_steps:
            times.append(i * h)
            points.append(n[0].copy())
    return np.array(times), np.array(points)


class OrbitClass(Enum):
    """Orbit taxonomy of the triaxial flow on circle normals."""

    EQ_LOW = "eq_low"
    EQ_SADDLE = "eq_saddle"
    EQ_HIGH = "eq_high"
    CIRC_LOW = "circ_low"
    SEPARATRIX = "separatrix"
    CIRC_HIGH = "circ_high"


_AXES = np.eye(3)


def classify_orbit(n0, form, tol=1e-9):
    """Classify the triaxial-flow orbit through n0.

    Equilibria are the six axis points; other orbits are sorted by energy
    q(n0) against the saddle level b: below it they circulate around the
    low axis, above it around the high axis, and at it (within tol scaled by
    the energy spread) they lie on the separatrix.
    """
    n = np.asarray(n0, dtype=float)
    n = n / np.linalg.norm(n)
    for axis, cls in ((0, OrbitClass.EQ_LOW), (1, OrbitClass.EQ_SADDLE), (2, OrbitClass.EQ_HIGH)):
        if min(np.linalg.norm(n - _AXES[axis]), np.linalg.norm(n + _AXES[axis])) <= tol:
            return cls
    energy = float(form.values(n))
    if abs(energy - form.b) <= tol * (form.c - form.a):
        return OrbitClass.SEPARATRIX
    return OrbitClass.CIRC_LOW if energy < form.b else OrbitClass.CIRC_HIGH


def separatrix_crossings(form):
    """The four points where the separatrix crosses the plane n2 = 0."""
    a, b, c = form.a, form.b, form.c
    x = math.sqrt((c - b) / (c - a))
    z = math.sqrt((b - a) / (c - a))
    return np.array([[sx * x, 0.0, sz * z] for sx in (1, -1) for sz in (1, -1)])


def orbit_period(n0, form, ds=1e-3, max_time=500.0):
    """Period of a closed triaxial orbit, by winding-angle event detection.

    Tracks the continuous angle of the normal around the axis it encircles
    and stops when it has wound by 2*pi, refining the crossing linearly.
    Equilibria and separatrix orbits return inf. Raises if the orbit fails
    to close within max_time (either max_time is too small or the orbit is
    too close to the separatrix to resolve at this step size).
    """
    cls = classify_orbit(n0, form)
    if cls in (OrbitClass.EQ_LOW, OrbitClass.EQ_SADDLE, OrbitClass.EQ_HIGH, OrbitClass.SEPARATRIX):
        return math.inf
    i, j = ((1, 2) if cls is OrbitClass.CIRC_LOW else (0, 1))
    field = make_flow_field(form)
    n = np.asarray(n0, dtype=float)[None, :].copy()
    n /= np.linalg.norm(n)
    angle_prev = math.atan2(n[0, j], n[0, i])
    total = 0.0
    steps = int(math.ceil(max_time / ds))
    two_pi = 2.0 * math.pi
    for k in range(1, steps + 1):
        n = _rk4_step(field, n, ds)
        angle = math.atan2(n[0, j], n[0, i])
        d = angle - angle_prev
        if d > math.pi:
            d -= two_pi
        elif d < -math.pi:
            d += two_pi
        new_total = total + d
        if abs(new_total) >= two_pi:
            frac = (two_pi - abs(total)) / abs(new_total - total)
            return (k - 1 + frac) * ds
        total = new_total
        angle_prev = angle
    raise RuntimeError("orbit did not close within max_time")


def geodesic_sees_region(n, region):
    """Does the great circle with normal n intersect the union of caps?

    The circle passes within angular distance asin(|n.p|) of any point p,
    so it meets a cap exactly when that distance is at most the cap radius.
    """
    return bool(circle_meets_cap_margin(n, region.caps) >= 0.0)


def circle_meets_cap_margin(normals, caps):
    """Best hit margin of great circles against caps.

    For each normal, the margin is max over caps of (radius - distance from
    the cap center to the circle); the circle meets the union exactly when
    the margin is >= 0. Distance from a point p to the circle with normal n
    is asin(|n . p|).
    """
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    centers = np.stack([c.center_array() for c in caps])
    radii = np.array([c.radius for c in caps])
    dist = np.arcsin(np.clip(np.abs(N @ centers.T), 0.0, 1.0))
    margins = (radii[None, :] - dist).max(axis=1)
    return margins if np.ndim(normals) > 1 else float(margins[0])


@dataclass(frozen=True)
class VgccSample:
    """One sampled start of the flow-averaged control check."""

    start: tuple
    energy: float
    orbit_class: str
    first_hit_time: float  # -1.0 when the orbit never met the region
    best_margin: float


@dataclass(frozen=True)
class VgccResult:
    holds: bool
    horizon: float
    n_samples: int
    worst_margin: float
    samples: tuple

    def uncontrolled(self):
        """Samples whose orbit never met the region within the horizon."""
        return tuple(s for s in self.samples if s.first_hit_time < 0.0)


def check_vgcc(region, hamiltonian, horizon, n_samples=2000, ds=1e-3, extra_starts=None):
    """Sampled check of the flow-averaged control condition.

    Starts from a deterministic lattice of circle normals (plus the six axis
    equilibria and four separatrix crossings when the Hamiltonian is
    triaxial, plus any extra_starts), transports each along the flow for
    time `horizon`, and records when its great circle first meets the cap
    union. Time zero counts. Like the static check, a holds=True verdict is
    sampled evidence, not a certificate.
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    starts = [fibonacci_sphere(int(n_samples))]
    if isinstance(hamiltonian, TriaxialForm):
        starts.append(np.concatenate([_AXES, -_AXES]))
        starts.append(separatrix_crossings(hamiltonian))
    if extra_starts is not None:
        extra = np.atleast_2d(np.asarray(extra_starts, dtype=float))
        starts.append(extra / np.linalg.norm(extra, axis=1, keepdims=True))
    n0 = np.concatenate(starts)
    total = n0.shape[0]

    if isinstance(hamiltonian, TriaxialForm):
        energies = hamiltonian.values(n0)
        classes = [classify_orbit(n, hamiltonian).value for n in n0]
    else:
        energies = np.full(total, math.nan)
        classes = [""] * total

    field = make_flow_field(hamiltonian)
    caps = region.caps
    best = circle_meets_cap_margin(n0, caps)
    first_hit = np.where(best >= 0.0, 0.0, -1.0)

    active = np.flatnonzero(first_hit < 0.0)
    n = n0[active].copy()
    n_steps = max(1, math.ceil(horizon / ds - 1e-12)) if horizon > 0 else 0
    h = horizon / n_steps if n_steps else 0.0
    for k in range(1, n_steps + 1):
        if active.size == 0:
            break
        n = _rk4_step(field, n, h)
        margins = circle_meets_cap_margin(n, caps)
        better = margins > best[active]
        if np.any(better):
            best[active[better]] = margins[better]
        hit = margins >= 0.0
        if np.any(hit):
            first_hit[active[hit]] = k * h
            keep = ~hit
            active = active[keep]
            n = n[keep]

    rows = tuple(
        VgccSample(
            start=tuple(float(x) for x in n0[i]),
            energy=float(energies[i]),
            orbit_class=classes[i],
            first_hit_time=float(first_hit[i]),
            best_margin=float(best[i]),
        )
        for i in range(total)
    )
    return VgccResult(
        holds=bool(np.all(first_hit >= 0.0)),
        horizon=float(horizon),
        n_samples=total,
        worst_margin=float(np.min(best)),
        samples=rows,
    )
