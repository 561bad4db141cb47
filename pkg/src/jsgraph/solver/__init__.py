"""Finite-element solvers for minimal, CMC and translator graphs."""

from .continuation import CompareReport, ContinuationResult, compare, continuation_solve, monotonicity_slack
from .export import read_solution, solution_csv, write_solution
from .assembly import assemble_jacobian, assemble_residual, fem_space, stiffness_matrix
from .newton import laplace_guess, newton_solve
from .problem import DirichletData, ProblemKind, Solution, SolverConfig

__all__ = [
    "CompareReport",
    "ContinuationResult",
    "compare",
    "continuation_solve",
    "monotonicity_slack",
    "read_solution",
    "solution_csv",
    "write_solution",
    "DirichletData",
    "ProblemKind",
    "Solution",
    "SolverConfig",
    "assemble_jacobian",
    "assemble_residual",
    "fem_space",
    "laplace_guess",
    "newton_solve",
    "stiffness_matrix",
]
