"""Desk-scale LP/MILP solving, verification and model file exchange."""

from .check import Violation, ViolationReport, check_solution
from .lp import INFEASIBLE, ITERATION_LIMIT, NUMERICAL, OPTIMAL, UNBOUNDED, LPSolution, solve_lp
from .milp import LIMIT, Solution, SolverParams, relative_gap, solve_milp
from .mps import (
    NameMap,
    SolutionFileError,
    export_model,
    import_model,
    import_solution,
    read_lp,
    read_mps,
    write_solution,
)
from .oracle import MAX_ENUMERATED, OracleGuardError, brute_force_oracle

__all__ = [
    "INFEASIBLE", "ITERATION_LIMIT", "LIMIT", "MAX_ENUMERATED", "NUMERICAL", "OPTIMAL", "UNBOUNDED",
    "LPSolution", "NameMap", "OracleGuardError", "Solution", "SolutionFileError", "SolverParams",
    "Violation", "ViolationReport", "brute_force_oracle", "check_solution", "export_model",
    "import_model", "import_solution", "read_lp", "read_mps", "relative_gap", "solve_lp",
    "solve_milp", "write_solution",
]
