"""End-to-end acceptance checks.

One test per shipped guarantee, at the documented tolerances, each
runnable on a laptop in minutes. Oracles are independent of the code
path they check: classical quadrature for transform identities, 1D
integrals for concentration, batched Hamiltonian integration for energy
conservation, closed-form propagator identities for the evolution.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize

from sphereobs import (
    Cap,
    EvolutionParams,
    PhasePoint,
    QuadGrid,
    Region,
    RegionQuadrature,
    TriaxialForm,
    WavePacketSpec,
    check_vgcc,
    classify_orbit,
    cluster_minima,
    eigen_obs_scan,
    eigensolve,
    evaluate_at,
    fibonacci_sphere,
    funk_average,
    funk_transform,
    inversion_amplification,
    invert_even,
    make_wavepacket,
    normalize,
    observability_quotient,
    propagate,
    separatrix_crossings,
    synthesize_potential,
    vflow,
)
from sphereobs.geodesics import OrbitClass, flow_field
from sphereobs.harmonics import highest_weight_coeffs, synthesize

FORM = TriaxialForm(1.0, 2.0, 3.0)
TWO_CAPS = Region((Cap((0.0, 0.0, 1.0), 0.15), Cap((0.0, 1.0, 0.0), 0.15)))
POLAR_QUARTER = Region((Cap((0.0, 0.0, 1.0), math.pi / 4),))


def random_unit(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def test_a1_circle_average_diagonalization(rng, random_coeffs):
    """Multiplier route equals direct circle quadrature; odd input dies."""
    worst = 0.0
    for _ in range(50):
        f = random_coeffs(16, rng)
        tf = funk_transform(f)
        for normal in random_unit(rng, 4):
            direct = funk_average(f, normal, n_points=256)
            spectral = complex(evaluate_at(tf, normal[None])[0])
            worst = max(worst, abs(direct - spectral))
    assert worst <= 1e-8

    for _ in range(10):
        g = random_coeffs(16, rng, parity="odd")
        assert funk_transform(g).norm() <= 1e-10 * g.norm()

    # round trip on the even part at the same band limit
    f = random_coeffs(16, rng, parity="even")
    back = invert_even(funk_transform(f))
    assert np.max(np.abs(back.data - f.data)) <= 1e-8

    # amplification of inversion matches the central binomial oracle
    for k in range(1, 21):
        oracle = 4.0**k / math.comb(2 * k, k)
        assert inversion_amplification(2 * k) == pytest.approx(oracle, rel=1e-8)


def test_a2_potential_synthesis_round_trip(rng):
    """Circle averages of the synthesized potential reproduce the form."""
    V = synthesize_potential(FORM)
    tv = funk_transform(V)
    pts = random_unit(rng, 100)
    assert np.max(np.abs(evaluate_at(tv, pts) - FORM.values(pts))) <= 1e-8
    # closed form (a+b+c) - 2q, checked against the quadrature oracle
    vals = evaluate_at(V, pts)
    assert np.max(np.abs(vals - (6.0 - 2.0 * FORM.values(pts)))) <= 1e-8
    for normal in pts[:10]:
        direct = funk_average(V, normal, n_points=256)
        assert abs(direct - FORM.values(normal)) <= 1e-8


def test_a3_critical_structure_and_energy():
    """Exactly six flow equilibria at the axes; orbits classify cleanly;
    energy is conserved to 1e-8 over s in [0, 100]."""
    grid = fibonacci_sphere(4000)
    norms = np.linalg.norm(flow_field(FORM, grid), axis=1)

    def residual(v):
        return float(np.sum(flow_field(FORM, normalize(v)) ** 2))

    zeros = []
    for i in np.argsort(norms)[:60]:
        res = minimize(residual, grid[i], method="Nelder-Mead",
                       options={"xatol": 1e-14, "fatol": 1e-30, "maxiter": 4000})
        z = normalize(res.x)
        if any(float(z @ w) > math.cos(0.3) for w in zeros):
            continue
        zeros.append(z)
    assert len(zeros) == 6
    axes = np.eye(3)
    matched = set()
    for z in zeros:
        assert np.linalg.norm(flow_field(FORM, z)) <= 1e-12
        j = int(np.argmax(np.abs(axes @ z)))
        assert min(np.linalg.norm(z - axes[j]), np.linalg.norm(z + axes[j])) <= 1e-6
        matched.add((j, float(np.sign(z @ axes[j]))))
    assert len(matched) == 6

    dist_to_zero = np.arccos(np.clip(np.max(np.abs(grid @ axes.T), axis=1), -1, 1))
    away = dist_to_zero >= 0.1
    assert float(np.min(norms[away])) >= 1e-3

    starts = np.vstack([
        fibonacci_sphere(50),
        separatrix_crossings(FORM),
        axes,
        -axes,
    ])
    classes = [classify_orbit(n, FORM) for n in starts]
    assert set(classes) == set(OrbitClass)

    energies0 = FORM.values(starts)
    n = starts.copy()
    drift = 0.0
    signs1 = np.sign(starts[:, 0])
    signs3 = np.sign(starts[:, 2])
    for _ in range(100):
        n = vflow(n, FORM, 1.0, ds=1e-3)
        drift = max(drift, float(np.max(np.abs(FORM.values(n) - energies0))))
        for k, cls in enumerate(classes):
            if cls is OrbitClass.CIRC_LOW:
                assert np.sign(n[k, 0]) == signs1[k]
            elif cls is OrbitClass.CIRC_HIGH:
                assert np.sign(n[k, 2]) == signs3[k]
    assert drift <= 1e-8

    for k, cls in enumerate(classes):
        e = energies0[k]
        if cls is OrbitClass.CIRC_LOW:
            assert FORM.a <= e < FORM.b
        elif cls is OrbitClass.CIRC_HIGH:
            assert FORM.b < e <= FORM.c


def test_a4_transported_control_vs_static():
    """The two small caps control every transported circle within the
    horizon, and fail to control static circles, with explicit witnesses."""
    extra = separatrix_crossings(FORM)
    res = check_vgcc(TWO_CAPS, FORM, 20.0, n_samples=2000, extra_starts=extra)
    assert res.holds
    assert res.worst_margin > 0.0
    assert res.n_samples >= 2000
    sep = [s for s in res.samples if s.orbit_class == "separatrix"]
    assert len(sep) >= len(extra)
    assert all(s.first_hit_time >= 0.0 for s in sep)

    static = check_vgcc(TWO_CAPS, None, 20.0, n_samples=2000)
    assert not static.holds
    witnesses = static.uncontrolled()
    assert witnesses
    w = witnesses[0]
    assert w.first_hit_time == -1.0
    assert w.best_margin < 0.0
    # independent confirmation: that circle's best approach to either cap
    # stays below the cap rims for a full revolution
    theta = np.linspace(0.0, 2 * math.pi, 4001)
    e1 = normalize(np.cross(w.start, [0.917, -0.31, 0.249]))
    e2 = np.cross(w.start, e1)
    circle = np.outer(np.cos(theta), e1) + np.outer(np.sin(theta), e2)
    for cap in TWO_CAPS.caps:
        assert float(np.max(circle @ np.asarray(cap.center))) < math.cos(cap.radius)


def test_a5_highest_weight_cap_concentration():
    """Polar-cap mass of the equatorial eigenfunctions matches the 1D
    oracle to 1e-8 and is far below 1e-3 from degree 25 on."""
    l_top = 40
    rq = RegionQuadrature(POLAR_QUARTER, l_top)
    cols = np.stack(
        [highest_weight_coeffs(k).resized(l_top).flat() for k in range(l_top + 1)],
        axis=1,
    )
    masses = rq.masses(cols)

    lo = math.cos(math.pi / 4)
    oracle = np.empty(l_top + 1)
    for k in range(l_top + 1):
        cap_part = quad(lambda t: (1 - t * t) ** k, lo, 1.0, epsabs=1e-16, epsrel=1e-13)[0]
        full = quad(lambda t: (1 - t * t) ** k, -1.0, 1.0, epsabs=1e-16, epsrel=1e-13)[0]
        oracle[k] = cap_part / full

    assert np.max(np.abs(masses - oracle)) <= 1e-8
    assert np.all(np.diff(masses[:26]) < 0.0)
    assert oracle[25] < 1e-3
    assert masses[25] <= oracle[25] + 1e-8
    assert np.all(masses[25:] < 1e-3)


def test_a6_propagator_correctness(rng, random_coeffs):
    """Norm preservation over a long run, eigenfunction stationarity, and
    the exact half-integer antiperiod."""
    scaled = TriaxialForm(0.2, 0.4, 0.6)
    u0 = make_wavepacket(
        WavePacketSpec(PhasePoint((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)), 0.1),
        QuadGrid(48),
    )
    params = EvolutionParams(2.0, 10.0, 1e-3, 48, potential=scaled, max_saves=21)
    # the step is coarse for the top of the band (phase warning expected);
    # norm preservation is what this run pins down
    with pytest.warns(UserWarning, match="exceeds pi/4"):
        traj = propagate(u0, params)
    assert traj.norm_drift() <= 1e-8

    dec = eigensolve(2.0, scaled, 24)
    idx = np.flatnonzero((dec.cluster_indices() == 8) & dec.trusted())
    pick = int(idx[len(idx) // 2])
    phi = dec.eigenfunction(pick)
    params = EvolutionParams(2.0, 1.0, 1e-4, 24, potential=scaled, max_saves=11)
    traj = propagate(phi, params)
    grid = QuadGrid(24)
    ref = np.abs(synthesize(phi, grid))
    wobble = max(
        float(np.max(np.abs(np.abs(synthesize(traj.coeffs(i), grid)) - ref)))
        for i in range(len(traj.times))
    )
    assert wobble <= 1e-6

    v0 = random_coeffs(16, rng)
    params = EvolutionParams(1.0, 2 * math.pi, 1e-3, 16, dispersion="halfwave")
    vT = propagate(v0, params).final()
    assert np.linalg.norm(vT.flat() + v0.flat()) <= 1e-8 * v0.norm()


def _transport_metrics(alpha, h):
    l_max = 2 * math.ceil(1.0 / h)
    x0 = np.array([1.0, 0.0, 0.0])
    xi0 = np.array([0.0, 1.0, 0.0])
    u0 = make_wavepacket(WavePacketSpec(PhasePoint(x0, xi0), h), QuadGrid(l_max))
    traj = propagate(u0, EvolutionParams(alpha, 1.0, 1e-2, l_max, max_saves=101))
    grid = QuadGrid(l_max)
    pts = grid.points()
    w = grid.weights()
    in_tube = np.abs(pts[:, 2]) <= math.sin(0.3)

    def ang(u, v):
        u = u / np.linalg.norm(u)
        return math.acos(max(-1.0, min(1.0, float(u @ v))))

    com_drift = track_err = 0.0
    tube_min = 1.0
    for i, t in enumerate(traj.times):
        wd = w * np.abs(synthesize(traj.coeffs(i), grid)).ravel() ** 2
        total = wd.sum()
        com = (wd @ pts) / total
        com_drift = max(com_drift, ang(com, x0))
        track_err = max(track_err, ang(com, math.cos(t) * x0 + math.sin(t) * xi0))
        tube_min = min(tube_min, float(wd[in_tube].sum() / total))
    return com_drift, track_err, tube_min


def test_a7_transport_dichotomy():
    """Dispersion-dependent packet transport at h=0.05, with the halving
    run never worsening a margin. All violations are reported together."""
    metrics = {h: {a: _transport_metrics(a, h) for a in (0.5, 1.0, 2.0)}
               for h in (0.05, 0.025)}
    violations = []

    def margin_com(h):
        return 0.1 - metrics[h][0.5][0]

    def margin_track(h):
        return 0.2 - metrics[h][1.0][1]

    def margin_tube(h):
        return metrics[h][2.0][2] - 0.8

    if margin_com(0.05) < 0:
        violations.append(
            "alpha=0.5 h=0.05: center of mass drifts %.5f, tolerance 0.1"
            % metrics[0.05][0.5][0])
    if margin_track(0.05) < 0:
        violations.append(
            "alpha=1 h=0.05: geodesic tracking error %.5f, tolerance 0.2"
            % metrics[0.05][1.0][1])
    if margin_tube(0.05) < 0:
        violations.append(
            "alpha=2 h=0.05: tube mass %.4f, needs >= 0.8"
            % metrics[0.05][2.0][2])
    for name, fn in (("frozen-center", margin_com),
                     ("geodesic-tracking", margin_track),
                     ("tube-mass", margin_tube)):
        if fn(0.025) < fn(0.05) - 1e-12:
            violations.append(
                "%s margin worsens under h-halving: %.6f -> %.6f"
                % (name, fn(0.05), fn(0.025)))
    assert not violations, "; ".join(violations)


@pytest.mark.parametrize("alpha", [0.5, 2.0])
def test_a8_observability_decreases_in_h(alpha):
    """Equatorial packets against the quarter polar cap: smaller scale,
    strictly smaller quotient."""
    region = POLAR_QUARTER
    x0, xi0 = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    vals = []
    for h in (0.2, 0.1, 0.05):
        l_max = 2 * math.ceil(1.0 / h)
        u0 = make_wavepacket(WavePacketSpec(PhasePoint(x0, xi0), h), QuadGrid(l_max))
        params = EvolutionParams(alpha, 1.0, 1e-2, l_max, max_saves=101)
        vals.append(observability_quotient(u0, params, region).quotient)
    assert vals[0] > vals[1] > vals[2]


def test_a9_eigenfunction_floor_with_potential():
    """With the transporting potential the per-cluster worst mass on the
    two caps keeps a positive floor through k=35; without it the minima
    collapse with k."""
    free = eigensolve(2.0, None, 40)
    rows_free = eigen_obs_scan(free, TWO_CAPS)
    min_free = cluster_minima(rows_free)

    resolvable = sorted(k for k, v in min_free.items() if v > 1e-13)
    assert len(resolvable) >= 8
    ks = np.array(resolvable, dtype=float)
    slope = np.polyfit(ks, np.log([min_free[int(k)] for k in ks]), 1)[0]
    assert slope < 0.0

    scaled = eigensolve(2.0, TriaxialForm(0.5, 1.0, 1.5), 40)
    rows_v = eigen_obs_scan(scaled, TWO_CAPS)
    min_v = cluster_minima(rows_v)
    floor = min(min_v[k] for k in range(10, 36))
    assert floor >= 10.0 * max(min_free.get(35, 0.0), 0.0)
    # measured floor, frozen as a regression bound
    assert floor > 3e-4
