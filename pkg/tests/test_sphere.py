import math

import numpy as np
import pytest

from sphereobs import Cap, PhasePoint, QuadGrid, Region, check_gcc, fibonacci_sphere, normalize
from sphereobs.sphere import (
    chart_to_sphere,
    frame_at,
    geodesic_flow_point,
    geodesic_hits_cap_within,
    segment_max_alignment,
    sphere_to_chart,
)


def test_normalize():
    v = normalize([3.0, 0.0, 4.0])
    assert np.allclose(v, [0.6, 0.0, 0.8])
    with pytest.raises(ValueError):
        normalize([0.0, 0.0, 0.0])


def test_phase_point_requires_orthonormal():
    PhasePoint([1, 0, 0], [0, 1, 0])
    with pytest.raises(ValueError):
        PhasePoint([1, 0, 0], [0.1, 1, 0])
    repaired = PhasePoint.normalized([1, 0, 0], [0.1, 1, 0])
    assert abs(repaired.base @ repaired.dir) < 1e-14
    assert abs(np.linalg.norm(repaired.dir) - 1) < 1e-14


def test_phase_point_antipode():
    p = PhasePoint([0, 0, 1], [1, 0, 0])
    q = p.antipode()
    assert np.allclose(q.base, [0, 0, -1])
    assert np.allclose(q.dir, [-1, 0, 0])


def test_cap_contains_and_validation():
    cap = Cap((0.0, 0.0, 1.0), 0.5)
    assert cap.contains(normalize([0.01, 0.0, 1.0]))
    assert not cap.contains([1.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        Cap((0.0, 0.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        Cap((0.0, 0.0, 1.0), 3.5)
    with pytest.raises(ValueError):
        Cap((0.0, 0.0, 2.0), 0.5)


def test_region_disjointness():
    r = Region((Cap((0, 0, 1.0), 0.2), Cap((0, 1.0, 0), 0.2)))
    assert r.pairwise_disjoint()
    r2 = Region((Cap((0, 0, 1.0), 1.0), Cap((0, 1.0, 0), 1.0)))
    assert not r2.pairwise_disjoint()


def test_quadgrid_weight_sum_and_monomials():
    grid = QuadGrid(10)
    pts = grid.points().reshape(grid.n_theta, grid.n_phi, 3)
    assert abs(grid.integrate(np.ones(pts.shape[:2])) - 4 * math.pi) < 1e-12

    # even monomial integrals over the sphere have the double-factorial form
    def dfact(n):
        return math.prod(range(n, 0, -2)) if n > 0 else 1

    for (a, b, c) in [(2, 0, 0), (2, 2, 0), (4, 0, 2), (0, 6, 2)]:
        vals = pts[..., 0] ** a * pts[..., 1] ** b * pts[..., 2] ** c
        exact = 4 * math.pi * dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1)
        assert abs(grid.integrate(vals) - exact) < 1e-12
    # odd powers integrate to zero
    assert abs(grid.integrate(pts[..., 0] * pts[..., 2] ** 2)) < 1e-13


def test_frame_at_orthonormal(rng):
    pts = [normalize(rng.standard_normal(3)) for _ in range(20)]
    pts += [np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0])]
    for x in pts:
        e1, e2 = frame_at(x)
        M = np.stack([e1, e2, x])
        assert np.allclose(M @ M.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(M) > 0.99


def test_chart_round_trip(rng):
    x0 = normalize([0.3, -0.5, 0.8])
    y = 0.4 * rng.standard_normal((17, 2))
    pts = chart_to_sphere(x0, y)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)
    back = sphere_to_chart(x0, pts)
    assert np.max(np.abs(back - y)) < 1e-12


def test_geodesic_flow_point():
    p = PhasePoint([1, 0, 0], [0, 0, 1])
    q = geodesic_flow_point(p, math.pi / 2)
    assert np.allclose(q.base, [0, 0, 1], atol=1e-15)
    assert np.allclose(q.dir, [-1, 0, 0], atol=1e-15)
    full = geodesic_flow_point(p, 2 * math.pi)
    assert np.allclose(full.base, p.base, atol=1e-14)


def test_segment_max_alignment_brute_force(rng):
    for _ in range(25):
        base = normalize(rng.standard_normal(3))
        d = rng.standard_normal(3)
        p = PhasePoint.normalized(base, d - (d @ base) * base)
        c = normalize(rng.standard_normal(3))
        T = rng.uniform(0.1, 2 * math.pi)
        got = segment_max_alignment(p, c, T)
        ts = np.linspace(0.0, T, 4001)
        vals = np.cos(ts)[:, None] * p.base + np.sin(ts)[:, None] * p.dir
        brute = float(np.max(vals @ c))
        assert abs(got - brute) < 1e-6


def test_geodesic_hits_cap(rng):
    cap = Cap((0.0, 0.0, 1.0), 0.4)
    # equatorial geodesic misses the polar cap at any horizon
    eq = PhasePoint([1, 0, 0], [0, 1, 0])
    assert not geodesic_hits_cap_within(eq, cap, 2 * math.pi)
    # meridian geodesic hits it
    mer = PhasePoint([1, 0, 0], [0, 0, 1])
    assert geodesic_hits_cap_within(mer, cap, 2 * math.pi)
    # but not within a horizon shorter than the travel distance
    assert not geodesic_hits_cap_within(mer, cap, math.pi / 2 - 0.4 - 0.01)
    assert geodesic_hits_cap_within(mer, cap, math.pi / 2 - 0.4 + 0.01)


def test_check_gcc_polar_cap_fails():
    region = Region((Cap((0.0, 0.0, 1.0), 0.5),))
    res = check_gcc(region, 2 * math.pi, n_samples=2000)
    assert not res.holds
    # margins are in cosine units: cos(pi/2) - cos(0.5) for the equatorial worst case
    assert res.worst_margin < -0.8
    # the worst geodesic is (close to) an equatorial one
    assert abs(res.worst_start.base[2]) < 0.15
    assert len(res.misses) > 0


def test_check_gcc_two_large_caps_hold():
    # caps of radius 1.2 about e_z and e_x: a circle normal n would need
    # |n.e_z| and |n.e_x| both above sin(1.2) to miss, impossible on S^2
    region = Region((Cap((0.0, 0.0, 1.0), 1.2), Cap((1.0, 0.0, 0.0), 1.2)))
    res = check_gcc(region, 2 * math.pi, n_samples=2000)
    assert res.holds
    assert res.worst_margin > 0
    assert len(res.misses) == 0


def test_fibonacci_sphere_deterministic():
    a = fibonacci_sphere(300)
    b = fibonacci_sphere(300)
    assert np.array_equal(a, b)
    assert a.shape == (300, 3)
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)
    # quasi-uniform: no big empty cap
    dots = a @ a.T
    np.fill_diagonal(dots, -1.0)
    nearest = np.arccos(np.clip(dots.max(axis=1), -1, 1))
    assert nearest.max() < 0.3
