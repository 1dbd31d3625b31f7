"""Self-contained mixed-integer linear programming engine.

The engine has three layers: a model container (`MilpModel`) with an
independent feasibility auditor (`check_solution`), a bounded-variable
revised simplex for LP relaxations (`solve_lp`), and a best-bound
branch-and-bound driver over the binary variables (`solve_milp`).
"""

from .model import (  # noqa: F401
    LE,
    EQ,
    GE,
    MilpModel,
    Violation,
    check_solution,
)
from .simplex import LpResult, solve_lp  # noqa: F401
from .branch_bound import MilpSolution, SolverOptions, solve_milp  # noqa: F401
