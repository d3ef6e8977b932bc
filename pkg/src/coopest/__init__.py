"""Bayesian minimum-MSE parameter estimation through a channel and its complement.

Single-system (Personik) estimators, privacy of estimation against the
environment, and cooperative estimation with local product measurements.
"""
from ._backend import kernels as _kernels
from .cooperative import (
    CoopConfig,
    LocalEstimatorPair,
    SolverReport,
    cooperative_min,
    cooperative_solve,
    delta,
    exact_alternating_solve,
    fixed_point_solve,
    gue_random_search,
    tilde_moments,
)
from .estimation import (
    EstimatorSolution,
    MomentOperators,
    cost_of,
    family_moments,
    min_cost,
    moments,
    personik_solve,
    privacy,
    spectral_measurement,
    weak_privacy,
)
from .matlin import (
    DimensionError,
    InconsistentSystemError,
    NonHermitianError,
    herm_eig,
    kron,
    partial_trace,
    solve_anticommutator,
)
from .quantum import (
    CoreUnitaryTarget,
    IsometryFamily,
    Prior,
    ProbeState,
    core_entangling_family,
    phase_damp_family,
)

__all__ = [
    "CoopConfig",
    "LocalEstimatorPair",
    "SolverReport",
    "cooperative_min",
    "cooperative_solve",
    "delta",
    "exact_alternating_solve",
    "fixed_point_solve",
    "gue_random_search",
    "tilde_moments",
    "EstimatorSolution",
    "MomentOperators",
    "cost_of",
    "family_moments",
    "min_cost",
    "moments",
    "personik_solve",
    "privacy",
    "spectral_measurement",
    "weak_privacy",
    "DimensionError",
    "InconsistentSystemError",
    "NonHermitianError",
    "herm_eig",
    "kron",
    "partial_trace",
    "solve_anticommutator",
    "CoreUnitaryTarget",
    "IsometryFamily",
    "Prior",
    "ProbeState",
    "core_entangling_family",
    "phase_damp_family",
    "BACKEND",
]

BACKEND = _kernels.NAME
__version__ = "0.1.0"
