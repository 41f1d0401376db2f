"""Derivative-free Gauss-Newton solver for nonlinear least squares."""

from ._core import (
    BudgetExhaustedError,
    ConfigurationError,
    DegenerateGeometryError,
    EvalBudget,
    EvalFailureError,
    EvalRecord,
    NoiseSpec,
    Problem,
    ProfileTable,
    SolveResult,
    SolverConfig,
    average_profiles,
    build_suite,
    data_profile,
    evals_to_solve,
    evaluate,
    lin_max_ball_box,
    make_problem,
    objective,
    performance_profile,
    solve,
    suite_names,
)

__all__ = [
    "BudgetExhaustedError",
    "ConfigurationError",
    "DegenerateGeometryError",
    "EvalBudget",
    "EvalFailureError",
    "EvalRecord",
    "NoiseSpec",
    "Problem",
    "ProfileTable",
    "SolveResult",
    "SolverConfig",
    "average_profiles",
    "build_suite",
    "data_profile",
    "evals_to_solve",
    "evaluate",
    "lin_max_ball_box",
    "make_problem",
    "objective",
    "performance_profile",
    "solve",
    "suite_names",
]

__version__ = "0.1.0"
