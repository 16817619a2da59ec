"""Observability and control-condition experiments for dispersive equations
on the unit sphere.

The package provides spherical-harmonic analysis and synthesis, the great
circle average transform and its inverse on even functions, geodesic
control-condition checkers (static and flow-averaged), a pseudo-spectral
propagator for fractional dispersion with a potential, and dense
eigenfunction observability scans.
"""

from .sphere import (
    Cap,
    PhasePoint,
    QuadGrid,
    Region,
    check_gcc,
    fibonacci_sphere,
    full_sphere,
    geodesic_flow_point,
    normalize,
)
from .harmonics import (
    FrequencyWindow,
    HarmonicCoeffs,
    RegionQuadrature,
    analyze,
    apply_frequency_window,
    apply_multiplier,
    band_mass,
    cap_mass,
    evaluate_at,
    fractional_multipliers,
    halfwave_multipliers,
    laplacian_multipliers,
    region_mass,
    synthesize,
)
from .radon import (
    TriaxialForm,
    funk_average,
    funk_multipliers,
    funk_transform,
    inversion_amplification,
    invert_even,
    synthesize_potential,
)
from .geodesics import (
    OrbitClass,
    check_vgcc,
    classify_orbit,
    geodesic_sees_region,
    normal_to_phase,
    orbit_period,
    orbit_trace,
    phase_to_normal,
    separatrix_crossings,
    vflow,
)
from .evolution import (
    EvolutionParams,
    EvolutionUnstable,
    ObservabilityReport,
    Trajectory,
    WavePacketSpec,
    center_of_mass,
    long_time_quotient,
    make_wavepacket,
    observability_quotient,
    propagate,
)
from .spectra import (
    ScanRow,
    SpectralDecomposition,
    cluster_index,
    cluster_minima,
    eigen_obs_scan,
    eigensolve,
    potential_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "Cap",
    "PhasePoint",
    "QuadGrid",
    "Region",
    "check_gcc",
    "fibonacci_sphere",
    "full_sphere",
    "geodesic_flow_point",
    "normalize",
    "FrequencyWindow",
    "HarmonicCoeffs",
    "RegionQuadrature",
    "analyze",
    "apply_frequency_window",
    "apply_multiplier",
    "band_mass",
    "cap_mass",
    "evaluate_at",
    "fractional_multipliers",
    "halfwave_multipliers",
    "laplacian_multipliers",
    "region_mass",
    "synthesize",
    "TriaxialForm",
    "funk_average",
    "funk_multipliers",
    "funk_transform",
    "inversion_amplification",
    "invert_even",
    "synthesize_potential",
    "OrbitClass",
    "check_vgcc",
    "classify_orbit",
    "geodesic_sees_region",
    "normal_to_phase",
    "orbit_period",
    "orbit_trace",
    "phase_to_normal",
    "separatrix_crossings",
    "vflow",
    "EvolutionParams",
    "EvolutionUnstable",
    "ObservabilityReport",
    "Trajectory",
    "WavePacketSpec",
    "center_of_mass",
    "long_time_quotient",
    "make_wavepacket",
    "observability_quotient",
    "propagate",
    "ScanRow",
    "SpectralDecomposition",
    "cluster_index",
    "cluster_minima",
    "eigen_obs_scan",
    "eigensolve",
    "potential_matrix",
    "__version__",
]
