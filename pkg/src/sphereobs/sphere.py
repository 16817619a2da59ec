"""Exact geometry on the unit two-sphere.

Points are unit vectors in R^3. A phase point is an orthonormal pair
(base, dir): the position of a unit-speed geodesic and its velocity. The
geodesic through it is t -> base*cos(t) + dir*sin(t), so questions like
"does this geodesic enter that spherical cap within time T" reduce to arc
arithmetic on a single angle and are answered exactly, without sampling t.

The module also carries the spherical quadrature grid used by the transform
layer (Gauss-Legendre in cos(theta) crossed with a uniform azimuth), tangent
frames and exp/log charts, and a checker for the geometric control condition
(every unit-speed geodesic meets a given union of caps within time T),
sampled over a deterministic lattice of geodesics.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "normalize",
    "PhasePoint",
    "Cap",
    "Region",
    "full_sphere",
    "QuadGrid",
    "frame_at",
    "chart_to_sphere",
    "sphere_to_chart",
    "geodesic_flow_point",
    "segment_max_alignment",
    "geodesic_hits_cap_within",
    "geodesic_hits_region_within",
    "fibonacci_sphere",
    "GccResult",
    "check_gcc",
]

_UNIT_TOL = 1e-10


def normalize(v):
    """Return v scaled to unit length. Raises on (near-)zero input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-14:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def _check_unit(v, name):
    n = np.linalg.norm(v)
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"{name} is not a unit vector (|{name}| = {n!r})")


class PhasePoint:
    """An orthonormal (base, dir) pair: a point on the unit tangent bundle.

    base is where the geodesic is, dir is where it is going. Both are unit
    vectors and orthogonal to machine precision; the constructor validates,
    and `PhasePoint.normalized` repairs nearly-orthonormal input instead.
    """

    __slots__ = ("base", "dir")

    def __init__(self, base, dir):
        base = np.asarray(base, dtype=float).copy()
        dir = np.asarray(dir, dtype=float).copy()
        if base.shape != (3,) or dir.shape != (3,):
            raise ValueError("base and dir must be 3-vectors")
        _check_unit(base, "base")
        _check_unit(dir, "dir")
        if abs(float(base @ dir)) > 1e-8:
            raise ValueError("base and dir must be orthogonal")
        base.setflags(write=False)
        dir.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "dir", dir)

    def __setattr__(self, *a):
        raise AttributeError("PhasePoint is immutable")

    @classmethod
    def normalized(cls, base, dir):
        """Build a PhasePoint from approximate input by Gram-Schmidt."""
        b = normalize(base)
        d = np.asarray(dir, dtype=float)
        d = d - (d @ b) * b
        return cls(b, normalize(d))

    def antipode(self):
        return PhasePoint(-self.base, -self.dir)

    def __repr__(self):
        return f"PhasePoint(base={tuple(self.base)}, dir={tuple(self.dir)})"


@dataclass(frozen=True)
class Cap:
    """Closed spherical cap: points x with angle(x, center) <= radius.

    center is stored as a plain tuple so caps are hashable and can key
    quadrature caches. radius is in (0, pi).
    """

    center: tuple
    radius: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,):
            raise ValueError("cap center must be a 3-vector")
        _check_unit(c, "center")
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        r = float(self.radius)
        if not (0.0 < r < math.pi):
            raise ValueError("cap radius must lie in (0, pi)")
        object.__setattr__(self, "radius", r)

    def center_array(self):
        return np.array(self.center)

    def contains(self, points):
        """Boolean mask: which of the given unit vectors lie in the cap.

        Accepts a single 3-vector or an (n, 3) array.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dots = np.clip(pts @ self.center_array(), -1.0, 1.0)
        inside = np.arccos(dots) <= self.radius + 1e-15
        return inside if np.ndim(points) > 1 else bool(inside[0])


@dataclass(frozen=True)
class Region:
    """A finite union of caps."""

    caps: tuple

    def __post_init__(self):
        caps = tuple(self.caps)
        if not caps:
            raise ValueError("region needs at least one cap")
        for c in caps:
            if not isinstance(c, Cap):
                raise TypeError("region members must be Cap instances")
        object.__setattr__(self, "caps", caps)

    def contains(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.zeros(len(pts), dtype=bool)
        for c in self.caps:
            inside |= c.contains(pts)
        return inside if np.ndim(points) > 1 else bool(inside[0])

    def pairwise_disjoint(self):
        """True when no two member caps intersect (strictly separated)."""
        caps = self.caps
        for i in range(len(caps)):
            for j in range(i + 1, len(caps)):
                ci, cj = caps[i], caps[j]
                sep = math.acos(
                    max(-1.0, min(1.0, float(np.dot(ci.center, cj.center))))
                )
                if sep <= ci.radius + cj.radius:
                    return False
        return True


def full_sphere():
    """A region covering the whole sphere (one cap of radius just under pi)."""
    return Region((Cap((0.0, 0.0, 1.0), math.pi - 1e-9),))


class QuadGrid:
    """Product quadrature grid exact for band-limited integrands.

    Gauss-Legendre nodes in t = cos(theta) (n_theta = l_max + 1) crossed with
    a uniform azimuth (n_phi = 2*l_max + 1). Integrates any spherical
    polynomial of degree <= 2*l_max + 1 exactly, which covers |u|^2 for u
    band-limited at l_max. Weights sum to 4*pi.
    """

    def __init__(self, l_max):
        l_max = int(l_max)
        if l_max < 0:
            raise ValueError("l_max must be >= 0")
        self.l_max = l_max
        self.n_theta = l_max + 1
        self.n_phi = 2 * l_max + 1
        nodes, w = np.polynomial.legendre.leggauss(self.n_theta)
        # store colatitude increasing, i.e. t = cos(theta) decreasing
        order = np.argsort(-nodes)
        self.cos_theta = nodes[order]
        self.theta_weights = w[order] * (2.0 * math.pi / self.n_phi)
        self.theta = np.arccos(self.cos_theta)
        self.sin_theta = np.sqrt(np.clip(1.0 - self.cos_theta**2, 0.0, None))
        self.phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def shape(self):
        return (self.n_theta, self.n_phi)

    def points(self):
        """All grid points as an (n_theta * n_phi, 3) array, theta-major."""
        st = self.sin_theta[:, None]
        ct = self.cos_theta[:, None]
        cp = np.cos(self.phi)[None, :]
        sp = np.sin(self.phi)[None, :]
        x = st * cp
        y = st * sp
        z = np.broadcast_to(ct, x.shape)
        return np.stack([x, y, z], axis=-1).reshape(-1, 3)

    def weights(self):
        """Quadrature weights matching `points()` (length n_theta * n_phi)."""
        return np.repeat(self.theta_weights, self.n_phi)

    def integrate(self, values):
        """Integrate grid samples over the sphere.

        values may be shaped (n_theta, n_phi) or flat, real or complex.
        """
        v = np.asarray(values).reshape(self.n_theta, self.n_phi)
        total = np.sum(self.theta_weights @ v)
        return float(total) if np.isrealobj(v) else complex(total)


def frame_at(x0):
    """Deterministic right-handed tangent frame (e1, e2) at x0.

    Built from a fixed reference axis: ez unless x0 is within ~25 degrees of
    +-ez, in which case ex. The frame satisfies e1 x e2 = x0 and sends the
    north pole to the canonical frame ((1,0,0), (0,1,0)).
    """
    x0 = np.asarray(x0, dtype=float)
    _check_unit(x0, "x0")
    k = np.array([0.0, 0.0, 1.0])
    if abs(float(x0 @ k)) > 0.9:
        k = np.array([1.0, 0.0, 0.0])
    e2 = np.cross(x0, k)
    e2 = e2 / np.linalg.norm(e2)
    e1 = np.cross(e2, x0)
    return e1, e2


def chart_to_sphere(x0, y):
    """Exponential-map chart: tangent coordinates y in R^2 -> sphere point.

    y = (y1, y2) are coefficients in the frame_at(x0) basis; the image is the
    point at geodesic distance |y| from x0 in direction y/|y|. Injective for
    |y| < pi. Accepts a single pair or an (..., 2) batch.
    """
    x0 = np.asarray(x0, dtype=float)
    e1, e2 = frame_at(x0)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    yy = np.atleast_2d(y)
    r = np.hypot(yy[:, 0], yy[:, 1])
    safe = np.where(r > 1e-300, r, 1.0)
    u = (yy[:, :1] * e1 + yy[:, 1:] * e2) / safe[:, None]
    out = np.cos(r)[:, None] * x0 + np.sin(r)[:, None] * u
    return out[0] if single else out.reshape(y.shape[:-1] + (3,))


def sphere_to_chart(x0, x):
    """Inverse of chart_to_sphere (log map). Requires x != -x0.

    x may be a single point or an (..., 3) batch; the chart coordinates
    come back with the matching leading shape.
    """
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    c = np.clip(pts @ x0, -1.0, 1.0)
    if np.any(c < -1.0 + 1e-12):
        raise ValueError("log map undefined at the antipode")
    r = np.arccos(c)
    u = pts - c[:, None] * x0
    nu = np.linalg.norm(u, axis=1)
    scale = np.where(nu > 1e-15, r / np.where(nu > 1e-15, nu, 1.0), 0.0)
    e1, e2 = frame_at(x0)
    out = np.stack([(u @ e1) * scale, (u @ e2) * scale], axis=1)
    return out[0] if single else out.reshape(x.shape[:-1] + (2,))


def geodesic_flow_point(p, t):
    """Advance a phase point time t along its geodesic (exact)."""
    ct, st = math.cos(t), math.sin(t)
    base = ct * p.base + st * p.dir
    dir = -st * p.base + ct * p.dir
    return PhasePoint.normalized(base, dir)


def segment_max_alignment(p, center, T):
    """Max of gamma(t).center over t in [0, T] for the geodesic gamma of p.

    gamma(t).center = A*cos(t - t0) with A = hypot(base.c, dir.c) and
    t0 = atan2(dir.c, base.c): exact arc arithmetic, no sampling. T >= 2*pi
    always returns A.
    """
    c = np.asarray(center, dtype=float)
    a = float(p.base @ c)
    b = float(p.dir @ c)
    A = math.hypot(a, b)
    if T < 0:
        raise ValueError("T must be >= 0")
    if A < 1e-300:
        return 0.0
    t0 = math.atan2(b, a) % (2.0 * math.pi)
    if t0 <= T:
        return A
    # peak not reached: endpoint maximum of A*cos(t - t0) on [0, T]
    return max(a, A * math.cos(T - t0))


def geodesic_hits_cap_within(p, cap, T):
    """Does the geodesic of p enter the cap at some time in [0, T]?"""
    return segment_max_alignment(p, cap.center, T) >= math.cos(cap.radius) - 1e-14


def geodesic_hits_region_within(p, region, T):
    return any(geodesic_hits_cap_within(p, c, T) for c in region.caps)


def fibonacci_sphere(n):
    """Deterministic quasi-uniform lattice of n points on the sphere."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


@dataclass(frozen=True)
class GccResult:
    """Verdict of a sampled geometric-control check.

    holds: every sampled geodesic met the region within the horizon.
    worst_margin: min over samples of (max alignment - cos radius), i.e. how
        deep the most marginal geodesic got into its best cap (positive) or
        how far it stayed outside (negative).
    worst_start: the phase point achieving worst_margin.
    n_samples: number of geodesics checked.
    misses: phase points that never entered the region (empty when holds).
    """

    holds: bool
    worst_margin: float
    worst_start: PhasePoint
    n_samples: int
    misses: tuple


def check_gcc(region, T, n_samples=2000):
    """Sampled check of the geodesic control condition at horizon T.

    Covers a deterministic lattice of oriented great circles: normals from
    fibonacci_sphere(n_samples), both orientations each. Each geodesic is
    tested against every cap with exact arc arithmetic, so the only
    approximation is the finite sampling of the circle space. A `holds=True`
    verdict is evidence, not a certificate.
    """
    if T <= 0:
        raise ValueError("horizon T must be positive")
    normals = fibonacci_sphere(int(n_samples))
    cos_r = np.array([math.cos(c.radius) for c in region.caps])
    centers = np.stack([c.center_array() for c in region.caps])

    worst_margin = np.inf
    worst_start = None
    misses = []
    two_pi = 2.0 * math.pi
    T_eff = min(float(T), two_pi)
    for n in normals:
        e1, e2 = frame_at(n)
        for d1, d2 in ((e1, e2), (e1, -e2)):
            # geodesic t -> d1*cos t + d2*sin t has normal +-n
            a = centers @ d1
            b = centers @ d2
            A = np.hypot(a, b)
            t0 = np.arctan2(b, a) % two_pi
            peak = np.where(t0 <= T_eff, A, np.maximum(a, A * np.cos(T_eff - t0)))
            margin = float(np.max(peak - cos_r))
            if margin < worst_margin:
                worst_margin = margin
                worst_start = PhasePoint.normalized(d1, d2)
            if margin < 0.0:
                misses.append(PhasePoint.normalized(d1, d2))
    return GccResult(
        holds=not misses,
        worst_margin=worst_margin,
        worst_start=worst_start,
        n_samples=2 * len(normals),
        misses=tuple(misses),
    )
