"""Spectral analysis of Gaussian perturbations of circle maps.

The package discretises the transition operator of the noisy map
``x -> f(x) + eps * sigma(x) * chi (mod 2 pi)``, computes its leading
spectrum, and compares it with the zero-noise limits predicted by the
periodic orbits of ``f``.
"""
from .analysis import (
    LambdaBifurcationEvent,
    MatchReport,
    SweepRecord,
    detect_lambda_bifurcations,
    match_spectra,
    sweep,
)
from .asymptotics import (
    HermiteMode,
    PredictedEigenvalue,
    ar_truncation_bound,
    build_local_ar_operator,
    hermite,
    local_scale,
    mod1_count,
    predicted_mode,
    predicted_spectrum,
)
from .errors import (
    BifurcationPointError,
    CircSpecError,
    ConfigurationError,
    ContractError,
    DegeneracyError,
    DomainError,
    HypothesisViolationError,
    InvalidOrbitError,
    NumericalFailureError,
)
from .maps import CircleMap, NoiseSpec, wrap_angle
from .orbits import (
    PeriodicOrbit,
    PhasePartition,
    build_partition,
    find_periodic_orbits,
    orbit_multiplier,
)
from .simulate import TrajectoryStats, compare_density, simulate_chain
from .transfer import (
    DiscretizedOperator,
    ResolutionWarning,
    SpectrumResult,
    assemble,
    block_norms,
    eigenvector,
    invariant_density,
    spectrum,
    wrapped_kernel,
)

__version__ = "0.1.0"
