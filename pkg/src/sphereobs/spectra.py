"""Dense spectral problem for dispersion plus potential, and eigenfunction
observability scans.

The Galerkin matrix of H = (-Laplacian)^{alpha/2} + V on the harmonic basis
truncated at l_max is a diagonal multiplier part plus the multiplication
matrix of V. The potential couples only nearby degrees and orders (band
structure inherited from V's band limit), which the assembly exploits: one
FFT of V in azimuth, then one small weighted product per order pair.

The scan asks how much L^2 mass every eigenfunction leaves on a region.
Because the criterion quantifies over all eigenfunctions, numerically
degenerate groups (gap below 1e-8) are not scanned member by member: the
minimum over the whole eigenspace is the smallest eigenvalue of the group's
localization Gram matrix, computed exactly on the region quadrature.
"""

import math
from dataclasses import dataclass

import numpy as np

from .harmonics import (
    HarmonicCoeffs,
    RegionQuadrature,
    _grid_table,
    fractional_multipliers,
    synthesize,
)
from .radon import TriaxialForm, synthesize_potential
from .sphere import QuadGrid

__all__ = [
    "potential_matrix",
    "SpectralDecomposition",
    "eigensolve",
    "cluster_index",
    "ScanRow",
    "eigen_obs_scan",
    "cluster_minima",
]

_DEGENERACY_GAP = 1e-8


def _coerce_potential(V):
    if isinstance(V, TriaxialForm):
        return synthesize_potential(V)
    return V


def _effective_band(V):
    """Highest degree with any coefficient mass (trims zero padding)."""
    per_l = V.degree_norms()
    nz = np.flatnonzero(per_l > 1e-14 * max(1.0, float(per_l.max())))
    return int(nz[-1]) if nz.size else 0


def potential_matrix(V, l_max):
    """Multiplication-by-V matrix on the flat harmonic basis, Hermitian.

    Entries are the integrals of conj(Y_lm) V Y_l'm' on a grid padded to be
    exact for every such product; the band-limit selection rules (couplings
    vanish beyond V's band in both degree and order) are enforced exactly.
    Raises if V is not real or the Hermiticity check fails.
    """
    V = _coerce_potential(V)
    if not V.is_real(1e-10):
        raise ValueError("potential must be a real function")
    L = int(l_max)
    LV = _effective_band(V)
    grid = QuadGrid(L + (LV + 1) // 2)
    vals = synthesize(V.resized(grid.l_max), grid)
    F = np.fft.fft(vals, axis=1)
    S = _grid_table(grid)

    N = (L + 1) ** 2
    M = np.zeros((N, N), dtype=complex)
    flat_idx = {}
    for m in range(-L, L + 1):
        flat_idx[m] = np.array([l * l + l + m for l in range(abs(m), L + 1)])
    for m in range(-L, L + 1):
        rows = flat_idx[m]
        A = S[grid.l_max + m, abs(m) : L + 1, :]
        for mp in range(max(-L, m - LV), min(L, m + LV) + 1):
            cols = flat_idx[mp]
            B = S[grid.l_max + mp, abs(mp) : L + 1, :]
            w = grid.theta_weights * F[:, (m - mp) % grid.n_phi]
            M[np.ix_(rows, cols)] = (A * w) @ B.T

    l_of = np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)
    M[np.abs(l_of[:, None] - l_of[None, :]) > LV] = 0.0

    herm = np.max(np.abs(M - M.conj().T))
    if herm > 1e-12 * max(1.0, float(np.max(np.abs(M)))):
        raise ValueError(f"assembled matrix is not Hermitian (defect {herm:.3e})")
    return 0.5 * (M + M.conj().T)


@dataclass
class SpectralDecomposition:
    """Eigenpairs of the truncated operator, ascending.

    eigenvectors holds flat coefficient columns; residuals are the exact
    Galerkin residual norms ||H v - lambda v||. trusted flags eigenvalues
    safely below the top of the resolved dispersive band (truncation
    corrupts the band edge).
    """

    alpha: float
    l_max: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    mean_potential: float

    def eigenfunction(self, i):
        return HarmonicCoeffs.from_flat(self.eigenvectors[:, i], self.l_max)

    def trusted(self):
        top = fractional_multipliers(self.l_max, self.alpha)[-1]
        return self.eigenvalues < 0.9 * top + self.mean_potential

    def cluster_indices(self):
        return np.array(
            [cluster_index(ev, self.alpha, self.mean_potential) for ev in self.eigenvalues]
        )


def eigensolve(alpha, V, l_max):
    """Dense self-adjoint eigendecomposition of dispersion plus potential."""
    L = int(l_max)
    l_of = np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)
    diag = fractional_multipliers(L, alpha)[l_of]
    if V is None:
        H = np.diag(diag).astype(complex)
        vbar = 0.0
    else:
        V = _coerce_potential(V)
        H = potential_matrix(V, L)
        H[np.diag_indices_from(H)] += diag
        vbar = float(V[0, 0].real) / math.sqrt(4.0 * math.pi)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        scale = float(np.max(np.abs(H)))
        raise RuntimeError(
            f"eigendecomposition failed (size {H.shape[0]}, max entry {scale:.3e})"
        ) from exc
    residuals = np.linalg.norm(H @ eigenvectors - eigenvectors * eigenvalues, axis=0)
    return SpectralDecomposition(
        alpha=float(alpha),
        l_max=L,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        residuals=residuals,
        mean_potential=vbar,
    )


def cluster_index(eigenvalue, alpha, mean_potential=0.0):
    """Nearest unperturbed shell: k with (k(k+1))^{alpha/2} closest to
    eigenvalue minus the potential's mean."""
    lam = max(float(eigenvalue) - mean_potential, 0.0)
    base = lam ** (2.0 / alpha) if lam > 0 else 0.0
    k = 0.5 * (math.sqrt(1.0 + 4.0 * base) - 1.0)
    return int(round(k))


@dataclass(frozen=True)
class ScanRow:
    """One eigenpair's observability record."""

    index: int
    eigenvalue: float
    cluster_k: int
    mass: float
    min_in_cluster: float
    trusted: bool


def eigen_obs_scan(decomp, region):
    """Region mass of every eigenfunction, with exact in-cluster minima.

    Returns one ScanRow per eigenpair. Masses come from the exact cap
    quadrature; within each numerically degenerate group (consecutive gap
    below 1e-8) the minimum over the whole eigenspace is the smallest
    eigenvalue of the group's localization Gram matrix. min_in_cluster for
    a row is the minimum over its shell (individual masses and degenerate-
    group minima together).
    """
    L = decomp.l_max
    rq = RegionQuadrature(region, L)
    clusters = decomp.cluster_indices()
    trusted = decomp.trusted()

    n = len(decomp.eigenvalues)
    groups = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and decomp.eigenvalues[j] - decomp.eigenvalues[j - 1] < _DEGENERACY_GAP:
            j += 1
        groups.append((i, j))
        i = j

    # One basis evaluation per block of whole groups: masses and any
    # degenerate-group Gram matrices come from the same node values.
    masses = np.empty(n)
    group_min = np.empty(n)
    w = rq.weights
    block = []
    for gi, (a, b) in enumerate(groups):
        block.append((a, b))
        if gi + 1 < len(groups) and block[-1][1] - block[0][0] < 384:
            continue
        s, e = block[0][0], block[-1][1]
        vals = rq.node_values(decomp.eigenvectors[:, s:e])
        masses[s:e] = w @ (np.abs(vals) ** 2)
        for a2, b2 in block:
            if b2 - a2 > 1:
                sub = vals[:, a2 - s : b2 - s]
                G = sub.conj().T @ (w[:, None] * sub)
                group_min[a2:b2] = float(np.linalg.eigvalsh(G)[0])
            else:
                group_min[a2:b2] = masses[a2:b2]
        block = []

    cluster_min = {}
    for k, g in zip(clusters, group_min):
        cluster_min[k] = min(cluster_min.get(k, math.inf), float(g))

    return [
        ScanRow(
            index=i,
            eigenvalue=float(decomp.eigenvalues[i]),
            cluster_k=int(clusters[i]),
            mass=float(masses[i]),
            min_in_cluster=cluster_min[clusters[i]],
            trusted=bool(trusted[i]),
        )
        for i in range(n)
    ]


def cluster_minima(rows, trusted_only=True):
    """Per-shell minima as a dict k -> min mass over the shell."""
    out = {}
    for r in rows:
        if trusted_only and not r.trusted:
            continue
        out[r.cluster_k] = min(out.get(r.cluster_k, math.inf), r.min_in_cluster)
    return out
