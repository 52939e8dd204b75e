"""Convex feasibility through online learning and zero-sum games."""

from ._core import (
    Domain,
    GameoptError,
    Problem,
    SolveResult,
    approx_translate,
    generalized_project,
    generate,
    lambda_star,
    load_problem,
    log_transform,
    parse_problem,
    project,
    project_simplex,
    regret_bound,
    run_cli,
    solve,
    stopping_threshold,
    strictify,
    verify,
)

__all__ = [
    "Domain",
    "GameoptError",
    "Problem",
    "SolveResult",
    "approx_translate",
    "generalized_project",
    "generate",
    "lambda_star",
    "load_problem",
    "log_transform",
    "parse_problem",
    "project",
    "project_simplex",
    "regret_bound",
    "run_cli",
    "solve",
    "stopping_threshold",
    "strictify",
    "verify",
]
