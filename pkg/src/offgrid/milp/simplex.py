"""Bounded-variable revised simplex used for all LP relaxations.

Rows are turned into equalities with one slack each (bounds encode the
relation), so variable bounds never become explicit rows. Infeasible starting
residuals are absorbed by per-row artificial variables driven out in a
phase-1 minimization. The basis inverse is maintained as an LU factorization
plus a product-form eta file, refreshed every few dozen pivots.

Pivoting is deterministic: Dantzig pricing (largest reduced cost, lowest
index on ties), switching to Bland's rule after a run of degenerate steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .model import MilpModel, StandardForm

AT_LB, AT_UB, FREE, BASIC = 0, 1, 2, 3

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL = "numerical"


class _Trouble(Exception):
    """Internal signal for numerical breakdown; triggers one careful retry."""


@dataclass
class LpResult:
    """Outcome of one LP solve over the structural variables."""

    status: str
    x: np.ndarray | None
    objective: float
    duals: np.ndarray | None
    iterations: int
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def solve_lp(model: MilpModel, feasibility_tol: float = 1e-7,
             max_iter: int | None = None) -> LpResult:
    """Solve the LP relaxation of a model (integrality markers ignored)."""
    std = model.standard_form()
    return solve_lp_std(std, std.lb, std.ub, feasibility_tol, max_iter)


def solve_lp_std(std: StandardForm, lb: np.ndarray, ub: np.ndarray,
                 feasibility_tol: float = 1e-7, max_iter: int | None = None) -> LpResult:
    """Solve with explicit variable bounds (used by branch-and-bound nodes)."""
    iterations = 0
    try:
        engine = _BoundedSimplex(std, lb, ub, feasibility_tol, max_iter)
        return engine.solve()
    except _Trouble as exc:
        iterations = getattr(exc, "iterations", 0)
    # Deterministic retry: Bland from the start, refactor on every pivot.
    try:
        engine = _BoundedSimplex(std, lb, ub, feasibility_tol, max_iter,
                                 bland=True, refactor_every=1)
        result = engine.solve()
        result.iterations += iterations
        return result
    except _Trouble as exc:
        return LpResult(NUMERICAL, None, math.nan, None,
                        iterations + getattr(exc, "iterations", 0), str(exc))


class _BoundedSimplex:
    DUAL_TOL = 1e-9
    PIV_TOL = 1e-9
    DEGEN_LIMIT = 40

    def __init__(self, std: StandardForm, lb: np.ndarray, ub: np.ndarray,
                 feas_tol: float, max_iter: int | None,
                 bland: bool = False, refactor_every: int = 32):
        self.std = std
        self.m, self.n = std.m, std.n
        self.nt = self.n + 2 * self.m
        self.A = std.a_ext
        self.b = std.b
        self.feas_tol = feas_tol
        self.max_iter = max_iter if max_iter is not None else 10_000 + 20 * self.nt
        self.bland_base = bland
        self.bland = bland
        self.refactor_every = refactor_every
        self.iterations = 0
        self.degen_streak = 0

        self.lb = np.concatenate([lb, std.slack_lb, np.zeros(self.m)])
        self.ub = np.concatenate([ub, std.slack_ub, np.zeros(self.m)])
        if np.any(self.lb[: self.n] > self.ub[: self.n]):
            raise _Trouble("crossed variable bounds")

        self.x = np.where(np.isfinite(self.lb), self.lb,
                          np.where(np.isfinite(self.ub), self.ub, 0.0))
        self.status = np.where(np.isfinite(self.lb), AT_LB,
                               np.where(np.isfinite(self.ub), AT_UB, FREE)).astype(int)
        self.basis = np.zeros(self.m, dtype=int)
        self.phase1_cost = np.zeros(self.nt)
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []
        self._needs_phase1 = False
        self._crash_basis()

    # -- setup --------------------------------------------------------------

    def _crash_basis(self) -> None:
        """All-slack start; rows a slack cannot absorb get a signed artificial."""
        n, m = self.n, self.m
        if m == 0:
            return
        r = self.b - self.A[:, :n] @ self.x[:n]
        for i in range(m):
            s = n + i
            absorbed = min(max(r[i], self.lb[s]), self.ub[s])
            if abs(r[i] - absorbed) <= 1e-12:
                self.basis[i] = s
                self.x[s] = r[i]
                self.status[s] = BASIC
            else:
                self.x[s] = absorbed
                self.status[s] = AT_LB if absorbed == self.lb[s] else AT_UB
                resid = r[i] - absorbed
                a = n + m + i
                if resid >= 0:
                    self.lb[a], self.ub[a] = 0.0, math.inf
                    self.phase1_cost[a] = 1.0
                else:
                    self.lb[a], self.ub[a] = -math.inf, 0.0
                    self.phase1_cost[a] = -1.0
                self.x[a] = resid
                self.status[a] = BASIC
                self.basis[i] = a
                self._needs_phase1 = True
        self._refactor()

    # -- basis inverse maintenance ------------------------------------------

    def _refactor(self) -> None:
        cols = self.A[:, self.basis]
        self.lu = lu_factor(cols, check_finite=False)
        diag = np.abs(np.diag(self.lu[0]))
        if diag.size and diag.min() < 1e-12 * max(1.0, diag.max()):
            raise self._trouble("singular basis")
        self.etas = []
        nonbasic_part = self.A @ self.x - cols @ self.x[self.basis]
        xb = lu_solve(self.lu, self.b - nonbasic_part, check_finite=False)
        if not np.all(np.isfinite(xb)):
            raise self._trouble("non-finite basic values")
        self.x[self.basis] = xb

    def _ftran(self, v: np.ndarray) -> np.ndarray:
        z = lu_solve(self.lu, v, check_finite=False)
        for r, w in self.etas:
            zr = z[r] / w[r]
            z = z - w * zr
            z[r] = zr
        return z

    def _btran(self, cb: np.ndarray) -> np.ndarray:
        z = cb.astype(float, copy=True)
        for r, w in reversed(self.etas):
            s = w @ z - w[r] * z[r]
            z[r] = (z[r] - s) / w[r]
        return lu_solve(self.lu, z, trans=1, check_finite=False)

    def _push_eta(self, r: int, w: np.ndarray) -> None:
        if abs(w[r]) < 1e-11:
            raise self._trouble("pivot element below threshold")
        self.etas.append((r, w.copy()))
        if len(self.etas) >= self.refactor_every:
            self._refactor()

    def _trouble(self, message: str) -> _Trouble:
        exc = _Trouble(message)
        exc.iterations = self.iterations
        return exc

    # -- core iteration -----------------------------------------------------

    def _iterate(self, c: np.ndarray, phase: int) -> str:
        m = self.m
        while True:
            if phase == 1:
                infeas = self.phase1_cost @ self.x
                if infeas <= 1e-11:
                    return OPTIMAL
            if self.iterations >= self.max_iter:
                raise self._trouble("iteration limit exceeded")
            self.iterations += 1

            y = self._btran(c[self.basis])
            d = c - y @ self.A
            movable = (self.lb < self.ub) & (self.status != BASIC)
            elig_lb = movable & (self.status == AT_LB) & (d < -self.DUAL_TOL)
            elig_ub = movable & (self.status == AT_UB) & (d > self.DUAL_TOL)
            elig_fr = movable & (self.status == FREE) & (np.abs(d) > self.DUAL_TOL)
            eligible = elig_lb | elig_ub | elig_fr
            if not eligible.any():
                return OPTIMAL
            if self.bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                j = int(np.argmax(score))
            if self.status[j] == AT_LB or (self.status[j] == FREE and d[j] < 0):
                sigma = 1.0
            else:
                sigma = -1.0

            w = self._ftran(self.A[:, j])
            delta = -sigma * w
            xb = self.x[self.basis]
            lb_b = self.lb[self.basis]
            ub_b = self.ub[self.basis]
            t_arr = np.full(m, math.inf)
            pos = delta > self.PIV_TOL
            neg = delta < -self.PIV_TOL
            if pos.any():
                t_arr[pos] = (ub_b[pos] - xb[pos]) / delta[pos]
            if neg.any():
                t_arr[neg] = (lb_b[neg] - xb[neg]) / delta[neg]
            t_arr = np.maximum(t_arr, 0.0)
            t_basic = t_arr.min() if m else math.inf
            t_bound = self.ub[j] - self.lb[j]
            t = min(t_basic, t_bound)
            if not math.isfinite(t):
                if phase == 1:
                    raise self._trouble("unbounded phase-1 direction")
                return UNBOUNDED

            if t_bound <= t_basic:
                self.x[self.basis] = xb + t * delta
                self.x[j] = self.ub[j] if sigma > 0 else self.lb[j]
                self.status[j] = AT_UB if sigma > 0 else AT_LB
            else:
                cand = np.flatnonzero(t_arr <= t_basic + 1e-12)
                if self.bland:
                    r = int(cand[np.argmin(self.basis[cand])])
                else:
                    r = int(cand[np.argmax(np.abs(delta[cand]))])
                leave = self.basis[r]
                self.x[self.basis] = xb + t * delta
                self.x[j] = self.x[j] + sigma * t
                self.x[leave] = ub_b[r] if delta[r] > 0 else lb_b[r]
                self.status[leave] = AT_UB if delta[r] > 0 else AT_LB
                self.status[j] = BASIC
                self.basis[r] = j
                self._push_eta(r, w)

            if t <= 1e-10:
                self.degen_streak += 1
                if self.degen_streak > self.DEGEN_LIMIT:
                    self.bland = True
            else:
                self.degen_streak = 0
                self.bland = self.bland_base

    # -- driver ---------------------------------------------------------------

    def solve(self) -> LpResult:
        if self.m == 0:
            return self._solve_unconstrained()
        c2 = np.concatenate([self.std.c, np.zeros(2 * self.m)])
        if self._needs_phase1:
            self._iterate(self.phase1_cost, phase=1)
            infeas = float(self.phase1_cost @ self.x)
            if infeas > self.feas_tol:
                return LpResult(INFEASIBLE, None, math.nan, None, self.iterations,
                                f"phase-1 infeasibility {infeas:.3e}")
            arts = slice(self.n + self.m, self.nt)
            self.lb[arts] = 0.0
            self.ub[arts] = 0.0
            nonbasic_art = (self.status[arts] != BASIC)
            self.x[np.arange(self.n + self.m, self.nt)[nonbasic_art]] = 0.0
        status = self._iterate(c2, phase=2)
        if status == UNBOUNDED:
            return LpResult(UNBOUNDED, None, -math.inf, None, self.iterations,
                            "objective unbounded below")
        self._verify()
        x_struct = self.x[: self.n].copy()
        objective = float(self.std.c @ x_struct)
        duals = self._btran(c2[self.basis])
        return LpResult(OPTIMAL, x_struct, objective, duals, self.iterations)

    def _solve_unconstrained(self) -> LpResult:
        c = self.std.c
        x = np.where(c > 0, self.lb[: self.n],
                     np.where(c < 0, self.ub[: self.n], self.x[: self.n]))
        if np.any(~np.isfinite(x) & (np.abs(c) > 0)):
            return LpResult(UNBOUNDED, None, -math.inf, None, 0, "free improving variable")
        x = np.where(np.isfinite(x), x, 0.0)
        return LpResult(OPTIMAL, x, float(c @ x), np.zeros(0), 0)

    def _verify(self) -> None:
        resid = self.A @ self.x - self.b
        if resid.size and np.max(np.abs(resid)) > self.feas_tol * 10:
            raise self._trouble(f"row residual {np.max(np.abs(resid)):.3e} after solve")
        below = self.lb - self.x
        above = self.x - self.ub
        worst = max(below.max(initial=0.0), above.max(initial=0.0))
        if worst > self.feas_tol * 10:
            raise self._trouble(f"bound violation {worst:.3e} after solve")
