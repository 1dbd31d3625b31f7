"""Best-bound branch-and-bound over the binary variables of a MilpModel.

Nodes are solved eagerly and kept on a min-heap keyed by their LP relaxation
value, so the popped bound is always the proven global lower bound; the
relative gap against the incumbent is therefore meaningful at every step.
Branching picks the most fractional binary (ties to the lowest index), and a
cheap round-and-fix heuristic is run at the root and periodically to obtain
incumbents early. Terminal status:

  Optimal   - the tree is exhausted (or the bound meets the incumbent).
  GapLimit  - the relative gap reached rel_gap_limit with open nodes left.
  TimeLimit - wall-clock or node budget exhausted (incumbent may be absent).
  Infeasible / Unbounded - certified by the root relaxation or exhaustion.
  NumericalFailure - an LP relaxation broke down irrecoverably.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import MilpError
from .model import MilpModel, check_solution
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp_std

GAP_DENOM_FLOOR = 1e-10


@dataclass(frozen=True)
class SolverOptions:
    """Termination limits and tolerances for solve_milp."""

    rel_gap_limit: float = 0.01
    time_limit: float = 300.0
    node_limit: int | None = None
    feasibility_tol: float = 1e-7
    integrality_tol: float = 1e-6
    heuristic_interval: int = 25

    def __post_init__(self):
        if self.rel_gap_limit <= 0:
            raise MilpError("rel_gap_limit must be positive")
        if self.time_limit <= 0:
            raise MilpError("time_limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise MilpError("node_limit must be positive")
        if self.feasibility_tol <= 0 or self.integrality_tol <= 0:
            raise MilpError("tolerances must be positive")


@dataclass
class MilpSolution:
    """Solver outcome; `values` is None when no incumbent was found."""

    status: str
    values: np.ndarray | None
    objective: float
    best_bound: float
    rel_gap: float
    nodes_explored: int
    wall_time: float
    simplex_iterations: int
    bound_history: list[tuple[float, float]] = field(default_factory=list)
    message: str = ""

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None


def relative_gap(objective: float, best_bound: float) -> float:
    if not math.isfinite(objective):
        return math.inf
    return (objective - best_bound) / max(abs(objective), GAP_DENOM_FLOOR)


def solve_milp(model: MilpModel, options: SolverOptions | None = None,
               initial_solution=None) -> MilpSolution:
    """Solve a MILP by LP-based branch-and-bound on its binary variables.

    `initial_solution` (one assignment or an iterable of candidates) seeds
    the incumbent; every candidate is audited with check_solution first and
    infeasible ones are ignored.
    """
    options = options or SolverOptions()
    t0 = time.perf_counter()
    std = model.standard_form()
    bin_idx = model.binary_indices()
    int_tol = options.integrality_tol

    incumbent_x: np.ndarray | None = None
    incumbent_obj = math.inf
    if initial_solution is not None:
        if isinstance(initial_solution, np.ndarray):
            candidates = [initial_solution]
        else:
            candidates = list(initial_solution)
        for cand in candidates:
            cand = np.asarray(cand, dtype=float)
            if check_solution(model, cand, options.feasibility_tol, int_tol):
                continue
            obj = float(std.c @ cand)
            if obj < incumbent_obj:
                incumbent_x = cand.copy()
                incumbent_obj = obj

    total_iters = 0
    nodes = 0
    history: list[tuple[float, float]] = []

    def elapsed() -> float:
        return time.perf_counter() - t0

    def done(status: str, best_bound: float, message: str = "") -> MilpSolution:
        obj = incumbent_obj if incumbent_x is not None else math.inf
        if incumbent_x is not None:
            best_bound = min(best_bound, obj)
            gap = relative_gap(obj, best_bound)
        else:
            gap = math.inf
        history.append((best_bound, obj))
        return MilpSolution(
            status=status,
            values=incumbent_x.copy() if incumbent_x is not None else None,
            objective=obj,
            best_bound=best_bound,
            rel_gap=gap,
            nodes_explored=nodes,
            wall_time=elapsed(),
            simplex_iterations=total_iters,
            bound_history=history,
            message=message,
        )

    root = solve_lp_std(std, std.lb, std.ub, options.feasibility_tol)
    nodes += 1
    total_iters += root.iterations
    if root.status == INFEASIBLE:
        return done("Infeasible", math.inf, root.message)
    if root.status == UNBOUNDED:
        return done("Unbounded", -math.inf, root.message)
    if root.status != OPTIMAL:
        return done("NumericalFailure", -math.inf, root.message)

    def is_integral(x: np.ndarray) -> bool:
        if bin_idx.size == 0:
            return True
        vals = x[bin_idx]
        return bool(np.max(np.abs(vals - np.round(vals)), initial=0.0) <= int_tol)

    def try_incumbent(x: np.ndarray, obj: float) -> None:
        nonlocal incumbent_x, incumbent_obj
        if obj < incumbent_obj - 1e-12:
            incumbent_x = x.copy()
            incumbent_obj = obj

    def round_fix_heuristic(x: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> None:
        """Fix every binary at its rounded LP value and re-solve the LP."""
        nonlocal total_iters
        if bin_idx.size == 0:
            return
        lo, hi = lb.copy(), ub.copy()
        rounded = np.clip(np.round(x[bin_idx]), lb[bin_idx], ub[bin_idx])
        lo[bin_idx] = rounded
        hi[bin_idx] = rounded
        res = solve_lp_std(std, lo, hi, options.feasibility_tol)
        total_iters += res.iterations
        if res.status == OPTIMAL:
            try_incumbent(res.x, res.objective)

    if is_integral(root.x):
        try_incumbent(root.x, root.objective)
        return done("Optimal", incumbent_obj)

    round_fix_heuristic(root.x, std.lb, std.ub)

    seq = 0
    heap: list[tuple[float, int, np.ndarray, np.ndarray, np.ndarray]] = []
    heapq.heappush(heap, (root.objective, seq, root.x, std.lb.copy(), std.ub.copy()))

    while heap:
        bound, _n, x_lp, lb, ub = heapq.heappop(heap)
        global_bound = min(bound, incumbent_obj)
        history.append((global_bound, incumbent_obj))

        if incumbent_x is not None:
            if bound >= incumbent_obj - 1e-9:
                return done("Optimal", incumbent_obj)
            if relative_gap(incumbent_obj, global_bound) <= options.rel_gap_limit:
                return done("GapLimit", global_bound)
        if elapsed() > options.time_limit:
            return done("TimeLimit", global_bound, "wall-clock limit reached")
        if options.node_limit is not None and nodes >= options.node_limit:
            return done("TimeLimit", global_bound, "node budget exhausted")

        if nodes % options.heuristic_interval == 0:
            round_fix_heuristic(x_lp, lb, ub)
            if incumbent_x is not None and bound >= incumbent_obj - 1e-9:
                return done("Optimal", incumbent_obj)

        fracs = np.abs(x_lp[bin_idx] - np.round(x_lp[bin_idx]))
        j = int(bin_idx[int(np.argmax(np.minimum(fracs, 1.0 - fracs)))])

        for fix in (0.0, 1.0):
            if fix < lb[j] or fix > ub[j]:
                continue
            lo, hi = lb.copy(), ub.copy()
            lo[j] = fix
            hi[j] = fix
            res = solve_lp_std(std, lo, hi, options.feasibility_tol)
            nodes += 1
            total_iters += res.iterations
            if res.status == INFEASIBLE:
                continue
            if res.status != OPTIMAL:
                return done("NumericalFailure", global_bound, res.message)
            child_bound = max(res.objective, bound)
            if incumbent_x is not None and child_bound >= incumbent_obj - 1e-9:
                continue
            if is_integral(res.x):
                try_incumbent(res.x, child_bound)
            else:
                seq += 1
                heapq.heappush(heap, (child_bound, seq, res.x, lo, hi))

    if incumbent_x is not None:
        return done("Optimal", incumbent_obj)
    return done("Infeasible", math.inf, "exhausted without integer-feasible point")
