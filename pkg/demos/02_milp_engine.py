"""The built-in MILP engine on a small knapsack, with the audit trail.

Run:  python3 demos/02_milp_engine.py
"""

import numpy as np

from offgrid import MilpModel, SolverOptions, check_solution, solve_lp, solve_milp

rng = np.random.default_rng(0)
values = rng.integers(3, 12, 8)
weights = rng.integers(2, 9, 8)
budget = 18.0

m = MilpModel(name="knapsack8")
idx = [m.add_variable(f"item{i}", 0, 1, binary=True) for i in range(8)]
m.set_objective({j: -float(values[i]) for i, j in enumerate(idx)})  # maximize value
m.add_constraint({j: float(weights[i]) for i, j in enumerate(idx)}, "<=", budget,
                 name="capacity")

print("LP relaxation first:")
lp = solve_lp(m)
print(f"  status={lp.status}  bound={-lp.objective:.2f}  x={np.round(lp.x, 3)}")

print("branch-and-bound:")
sol = solve_milp(m, SolverOptions(rel_gap_limit=1e-9, time_limit=30.0))
chosen = [i for i, j in enumerate(idx) if sol.values[j] > 0.5]
print(f"  status={sol.status}  value={-sol.objective:.0f}  nodes={sol.nodes_explored}"
      f"  gap={sol.rel_gap:.2e}")
print(f"  picked items {chosen} with weights {[int(weights[i]) for i in chosen]}"
      f" (budget {budget:.0f})")

print("independent audit:", check_solution(m, sol.values) or "feasible")

print("\nplain-text dump for offline cross-checking:")
print("\n".join(m.to_lp_text().splitlines()[:8]), "\n  ...")
