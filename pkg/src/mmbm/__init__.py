"""Stationary analysis and simulation of regulated Markov-modulated
Brownian motions with classical, sticky, and phase-resampling boundaries."""

from .errors import (
    ConvergenceError,
    MmbmError,
    SolverError,
    StabilityError,
    SubspaceSelectionError,
    ValidationError,
)
from .linalg import (
    QuadraticSolution,
    RiccatiSolution,
    is_irreducible,
    matrix_exponential,
    rate_threshold,
    solve_riccati_psi,
    solve_stable_quadratic,
    stationary_row_vector,
)
from .model import (
    MmbmModel,
    ResampleSpec,
    StickySpec,
    mean_drift,
    validate_model,
    validate_resample,
    validate_sticky,
)
from .stationary import (
    PhaseCdf,
    evaluate_cdf,
    matrix_K,
    regulated_weight_forms,
    scalar_sticky_reference,
    stationary_resampled,
    stationary_standard,
    stationary_sticky,
    vector_ell,
    vector_nu,
)
from .regenerative import (
    AsymptoticRow,
    BoundaryVariant,
    RegenerationLaw,
    asymptotic_report,
    asymptotic_report_csv,
    boundary_kernels,
    expected_sojourn,
    phi_transition_finite,
    phi_transition_limit,
    regen_cdf,
    resampled_variant,
    rho_limit,
    standard_variant,
    sticky_variant,
)
from .simulate import (
    EmpiricalLaw,
    RegenComparison,
    SimConfig,
    ks_distance,
    regen_stats_compare,
    simulate,
)
from .verify import CheckResult, collinearity_gap, run_verify

__version__ = "0.1.0"

__all__ = [
    "AsymptoticRow", "BoundaryVariant", "CheckResult", "ConvergenceError",
    "EmpiricalLaw", "MmbmError", "MmbmModel", "PhaseCdf", "QuadraticSolution",
    "RegenComparison", "RegenerationLaw", "ResampleSpec", "RiccatiSolution",
    "SimConfig", "SolverError", "StabilityError", "StickySpec",
    "SubspaceSelectionError", "ValidationError", "asymptotic_report",
    "asymptotic_report_csv", "boundary_kernels", "collinearity_gap",
    "evaluate_cdf", "expected_sojourn", "is_irreducible", "ks_distance",
    "matrix_K", "matrix_exponential", "mean_drift", "phi_transition_finite",
    "phi_transition_limit", "rate_threshold", "regen_cdf",
    "regen_stats_compare", "regulated_weight_forms", "resampled_variant",
    "rho_limit", "run_verify", "scalar_sticky_reference", "simulate",
    "solve_riccati_psi", "solve_stable_quadratic", "standard_variant",
    "stationary_resampled", "stationary_row_vector", "stationary_standard",
    "stationary_sticky", "sticky_variant", "validate_model",
    "validate_resample", "validate_sticky", "vector_ell", "vector_nu",
]
