import math

import numpy as np
import pytest
from scipy.special import ellipk

from sphereobs import (
    OrbitClass,
    PhasePoint,
    TriaxialForm,
    check_vgcc,
    classify_orbit,
    normal_to_phase,
    orbit_period,
    orbit_trace,
    phase_to_normal,
    separatrix_crossings,
    vflow,
)
from sphereobs.geodesics import flow_field
from sphereobs.sphere import Cap, Region, normalize

FORM = TriaxialForm(1.0, 2.0, 3.0)


def test_normal_round_trip(rng):
    for _ in range(10):
        base = normalize(rng.standard_normal(3))
        d = rng.standard_normal(3)
        p = PhasePoint.normalized(base, d - (d @ base) * base)
        n = phase_to_normal(p)
        assert abs(np.linalg.norm(n) - 1) < 1e-12
        q = normal_to_phase(n)
        assert np.allclose(phase_to_normal(q), n, atol=1e-12)


def test_flow_field_zeros_at_axes():
    axes = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])
    f = flow_field(FORM, np.concatenate([axes, -axes]))
    assert np.max(np.abs(f)) < 1e-15


def test_flow_field_tangency(rng):
    n = rng.standard_normal((50, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    f = flow_field(FORM, n)
    assert np.max(np.abs(np.sum(f * n, axis=1))) < 1e-13


def test_energy_conservation():
    n0 = normalize([0.4, 0.5, 0.77])
    times, pts = orbit_trace(n0, FORM, 50.0, ds=1e-3, stride=100)
    E = FORM.values(pts)
    assert np.max(np.abs(E - E[0])) < 1e-10


def test_rk4_order():
    """Halving the step divides the endpoint error by about 16."""
    n0 = normalize([0.4, 0.5, 0.77])
    ref = vflow(n0[None, :], FORM, 3.0, ds=5e-5)[0]
    errs = []
    for ds in (4e-3, 2e-3, 1e-3):
        end = vflow(n0[None, :], FORM, 3.0, ds=ds)[0]
        errs.append(np.linalg.norm(end - ref))
    assert errs[0] / errs[1] > 12
    assert errs[1] / errs[2] > 10


def test_classification_by_energy():
    assert classify_orbit(np.array([1.0, 0, 0]), FORM) == OrbitClass.EQ_LOW
    assert classify_orbit(np.array([0.0, 1.0, 0]), FORM) == OrbitClass.EQ_SADDLE
    assert classify_orbit(np.array([0.0, 0, -1.0]), FORM) == OrbitClass.EQ_HIGH
    low = normalize([0.9, 0.3, 0.1])
    assert FORM.values(low) < 2
    assert classify_orbit(low, FORM) == OrbitClass.CIRC_LOW
    high = normalize([0.1, 0.3, 0.9])
    assert FORM.values(high) > 2
    assert classify_orbit(high, FORM) == OrbitClass.CIRC_HIGH
    for n in separatrix_crossings(FORM):
        assert classify_orbit(n, FORM) == OrbitClass.SEPARATRIX
        assert FORM.values(n) == pytest.approx(2.0, abs=1e-12)


def test_separatrix_crossings_locations():
    xs = sorted(abs(n[0]) for n in separatrix_crossings(FORM))
    # |n1| = sqrt((c-b)/(c-a)), n2 = 0, |n3| = sqrt((b-a)/(c-a))
    assert xs[-1] == pytest.approx(math.sqrt(0.5))
    for n in separatrix_crossings(FORM):
        assert n[1] == pytest.approx(0.0, abs=1e-15)


def test_period_against_elliptic_oracle():
    """Closed-orbit periods against the complete elliptic integral."""
    a, b, c = FORM.a, FORM.b, FORM.c
    for n0 in (normalize([0.95, 0.2, 0.24]), normalize([0.2, 0.3, 0.93])):
        E = float(FORM.values(n0))
        if E < b:
            k2 = (E - a) * (c - b) / ((b - a) * (c - E))
            T = 2.0 * ellipk(k2) / math.sqrt((b - a) * (c - E))
        else:
            k2 = (b - a) * (c - E) / ((E - a) * (c - b))
            T = 2.0 * ellipk(k2) / math.sqrt((E - a) * (c - b))
        got = orbit_period(n0, FORM)
        assert got == pytest.approx(T, rel=1e-5)


def test_period_infinite_cases():
    assert orbit_period(np.array([1.0, 0.0, 0.0]), FORM) == math.inf
    sep = separatrix_crossings(FORM)[0]
    assert orbit_period(sep, FORM) == math.inf


def test_orbit_closes():
    n0 = normalize([0.95, 0.2, 0.24])
    T = orbit_period(n0, FORM)
    end = vflow(n0[None, :], FORM, T, ds=5e-4)[0]
    assert np.linalg.norm(end - n0) < 1e-5


def test_circ_low_orbits_encircle_e1():
    """Low-energy orbits wind around +-e1 keeping the sign of n1."""
    n0 = normalize([0.9, 0.3, 0.1])
    times, pts = orbit_trace(n0, FORM, 20.0, ds=1e-3, stride=50)
    assert np.all(pts[:, 0] > 0)
    # and actually wind: n2 changes sign along the way
    assert pts[:, 1].min() < 0 < pts[:, 1].max()


def test_circ_high_orbits_encircle_e3():
    n0 = normalize([0.1, 0.3, 0.9])
    times, pts = orbit_trace(n0, FORM, 20.0, ds=1e-3, stride=50)
    assert np.all(pts[:, 2] > 0)
    assert pts[:, 1].min() < 0 < pts[:, 1].max()


def test_vgcc_two_caps_holds():
    region = Region((Cap((0.0, 0.0, 1.0), 0.15), Cap((0.0, 1.0, 0.0), 0.15)))
    res = check_vgcc(region, FORM, horizon=20.0, n_samples=500)
    assert res.holds
    assert res.worst_margin > 0
    hits = np.array([s.first_hit_time for s in res.samples])
    assert np.all(hits >= 0)
    assert hits.max() < 20.0


def test_vgcc_without_flow_fails():
    region = Region((Cap((0.0, 0.0, 1.0), 0.15), Cap((0.0, 1.0, 0.0), 0.15)))
    res = check_vgcc(region, None, horizon=20.0, n_samples=500)
    assert not res.holds
    bad = res.uncontrolled()
    assert len(bad) > 0
    for s in bad[:10]:
        assert s.first_hit_time == -1.0
        assert s.best_margin < 0


def test_vgcc_time_zero_counts():
    # a cap deeper than pi/2 is seen by every great circle, at s = 0
    region = Region((Cap((0.0, 0.0, 1.0), 1.6),))
    res = check_vgcc(region, FORM, horizon=0.0, n_samples=100)
    hits = np.array([s.first_hit_time for s in res.samples])
    assert np.all(hits == 0.0)
