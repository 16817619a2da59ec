"""Great-circle averaging (Funk transform) and the triaxial potential family.

The transform sends a function on the sphere to its average over the great
circle with a given unit normal. On harmonics it acts diagonally: degree l
is scaled by the value of the Legendre polynomial at zero, which vanishes
for odd l and alternates in sign with slow sqrt decay for even l. That gives
an exact spectral implementation, an inversion on even functions, and an
explicit handle on how fast inversion amplifies noise.

The triaxial family ties the transform to dynamics: for the quadratic form
q(x) = a x1^2 + b x2^2 + c x3^2 with 0 < a < b < c, the potential
V = (a + b + c) - 2 q has great-circle averages equal to q itself, so the
effective Hamiltonian seen by waves along geodesics is q evaluated on
circle normals.
"""

import math
from dataclasses import dataclass

import numpy as np

from .harmonics import HarmonicCoeffs, analyze, apply_multiplier, evaluate_at
from .sphere import QuadGrid, frame_at

__all__ = [
    "funk_multipliers",
    "funk_transform",
    "funk_average",
    "invert_even",
    "inversion_amplification",
    "TriaxialForm",
    "synthesize_potential",
]


def funk_multipliers(l_max):
    """Diagonal action of great-circle averaging: P_l(0) for l = 0..l_max.

    Computed by the stable two-step recurrence P_l(0) = -(l-1)/l * P_{l-2}(0)
    from P_0(0) = 1, P_1(0) = 0. Odd degrees vanish identically.
    """
    mult = np.zeros(int(l_max) + 1)
    mult[0] = 1.0
    for l in range(2, l_max + 1, 2):
        mult[l] = -(l - 1.0) / l * mult[l - 2]
    return mult


def funk_transform(coeffs):
    """Great-circle average of a function, as a function of the circle normal."""
    return apply_multiplier(coeffs, funk_multipliers(coeffs.l_max))


def funk_average(f, normal, n_points=256):
    """Average of a function over one great circle, by direct quadrature.

    f may be HarmonicCoeffs or any callable mapping an (n, 3) array of unit
    vectors to values. Uniform quadrature over the circle orthogonal to
    `normal`; exact for band-limited input once n_points exceeds the band.
    Kept separate from the spectral route so the two can cross-check.
    """
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    e1, e2 = frame_at(n)
    t = 2.0 * math.pi * np.arange(int(n_points)) / int(n_points)
    circle = np.cos(t)[:, None] * e1 + np.sin(t)[:, None] * e2
    if isinstance(f, HarmonicCoeffs):
        values = evaluate_at(f, circle)
    else:
        values = np.asarray(f(circle))
    return complex(np.mean(values))


def invert_even(coeffs, odd_tol=1e-10):
    """Invert the transform on even functions.

    Raises when the input carries more than a relative `odd_tol` of l2 mass
    on odd degrees (those are annihilated by averaging, so they cannot be
    recovered); otherwise divides the even degrees by their multipliers.
    """
    mult = funk_multipliers(coeffs.l_max)
    odd = np.linalg.norm(coeffs.data[1::2])
    if odd > odd_tol * max(1.0, coeffs.norm()):
        raise ValueError(
            f"input has odd-degree mass {odd:.3e}; great-circle averages "
            "determine only the even part"
        )
    inv = np.zeros_like(mult)
    inv[::2] = 1.0 / mult[::2]
    out = apply_multiplier(coeffs, inv)
    out.data[1::2] = 0.0
    return out


def inversion_amplification(l):
    """Noise gain 1/|P_l(0)| of inversion at even degree l.

    Equals 4^k / C(2k, k) for l = 2k and grows like sqrt(pi*l/2): inversion
    is only mildly ill-posed, losing about half a digit per decade of degree.
    """
    l = int(l)
    if l % 2:
        raise ValueError("odd degrees are annihilated; amplification undefined")
    k = l // 2
    return 4.0**k / math.comb(2 * k, k)


@dataclass(frozen=True)
class TriaxialForm:
    """Quadratic form q(x) = a x1^2 + b x2^2 + c x3^2 with 0 < a < b < c.

    Doubles as the Hamiltonian on circle normals and, through
    `potential_values`, as the potential whose great-circle averages
    reproduce q.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        a, b, c = float(self.a), float(self.b), float(self.c)
        if not (0.0 < a < b < c):
            raise ValueError("need 0 < a < b < c")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def diag(self):
        return np.array([self.a, self.b, self.c])

    def values(self, points):
        """q at unit vectors ((n, 3) array or a single 3-vector)."""
        pts = np.asarray(points, dtype=float)
        return (pts * pts) @ self.diag

    def potential_values(self, points):
        """V = (a + b + c) - 2 q at the given points."""
        return (self.a + self.b + self.c) - 2.0 * self.values(points)

    def potential_sup(self):
        """Sup norm of V over the sphere."""
        s = self.a + self.b + self.c
        return max(abs(s - 2.0 * self.a), abs(s - 2.0 * self.c))


def synthesize_potential(form, l_max=2):
    """Harmonic coefficients of the potential V = (a+b+c) - 2q.

    V is a degree-2 spherical polynomial, so l_max = 2 captures it exactly;
    larger l_max zero-pads, which is convenient for Galerkin assembly. The
    pointwise closed form is `form.potential_values`.
    """
    if l_max < 2:
        raise ValueError("the potential has degree 2; l_max must be >= 2")
    grid = QuadGrid(2)
    values = form.potential_values(grid.points()).reshape(grid.shape)
    return analyze(values.astype(complex), grid, 2).resized(l_max)
