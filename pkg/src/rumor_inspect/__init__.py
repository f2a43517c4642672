"""Numerical toolkit for a two-message (truth vs. rumor) SIS diffusion model
with message inspection: steady states, transient dynamics, and budgeted
inspection-rate planning.
"""

__version__ = "0.1.0"

from .model import (
    Allocation,
    ModelParams,
    ParameterError,
    SolverConfig,
    SolverError,
    SteadyState,
    eradication_threshold,
    full_steady_state,
    no_rumor_positivity_readings,
    no_rumor_truth,
    recompose_prevalence,
    rumor_steady_state,
    total_prevalence_map,
    truth_map,
    truth_steady_state,
    truth_steady_state_given_rumor,
)
from .dynamics import (
    DynState,
    IntegratorConfig,
    IntegratorError,
    Rates,
    StabilityReport,
    Trajectory,
    derivatives,
    group_masses,
    integrate,
    prevalences,
    seed_state,
    verify_global_stability,
)
from .planner import (
    Budget,
    CubicConstraint,
    FeasibilityError,
    OptResult,
    Thresholds,
    closed_thresholds,
    compute_thresholds,
    cubic_coefficients,
    cubic_factored_gap,
    diversification_budget_range,
    marginal_condition_targeted,
    marginal_condition_uniform,
    maximize_platform,
    maximize_truth_targeted,
    maximize_truth_uniform,
    minimize_rumor,
)

__all__ = [
    "__version__",
    "Allocation",
    "Budget",
    "CubicConstraint",
    "DynState",
    "FeasibilityError",
    "IntegratorConfig",
    "IntegratorError",
    "ModelParams",
    "OptResult",
    "ParameterError",
    "Rates",
    "SolverConfig",
    "SolverError",
    "StabilityReport",
    "SteadyState",
    "Thresholds",
    "Trajectory",
    "closed_thresholds",
    "compute_thresholds",
    "cubic_coefficients",
    "cubic_factored_gap",
    "derivatives",
    "diversification_budget_range",
    "eradication_threshold",
    "full_steady_state",
    "group_masses",
    "integrate",
    "marginal_condition_targeted",
    "marginal_condition_uniform",
    "maximize_platform",
    "maximize_truth_targeted",
    "maximize_truth_uniform",
    "minimize_rumor",
    "no_rumor_positivity_readings",
    "no_rumor_truth",
    "prevalences",
    "recompose_prevalence",
    "rumor_steady_state",
    "seed_state",
    "total_prevalence_map",
    "truth_map",
    "truth_steady_state",
    "truth_steady_state_given_rumor",
    "verify_global_stability",
]
