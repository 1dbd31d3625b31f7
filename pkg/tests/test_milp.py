"""MILP engine tests: LP geometry, enumeration oracles, gap/limit semantics."""

import itertools
import math

import numpy as np
import pytest

from offgrid.errors import MilpError
from offgrid.milp import EQ, GE, LE, MilpModel, SolverOptions, check_solution, solve_lp, solve_milp
from offgrid.milp.simplex import solve_lp_std

EXACT = SolverOptions(rel_gap_limit=1e-12, time_limit=120.0)


def random_model(rng, n_bin, n_cont, n_rows, anchor=True):
    """Random bounded MILP; `anchor` guarantees feasibility at a known point."""
    m = MilpModel()
    for i in range(n_bin):
        m.add_variable(f"b{i}", 0, 1, binary=True)
    lo_hi = []
    for i in range(n_cont):
        lo = float(rng.uniform(-5, 0))
        hi = lo + float(rng.uniform(0.5, 6))
        lo_hi.append((lo, hi))
        m.add_variable(f"c{i}", lo, hi)
    n = n_bin + n_cont
    m.set_objective({j: float(rng.integers(-9, 10)) for j in range(n)})
    x0 = np.concatenate([
        rng.integers(0, 2, n_bin).astype(float),
        np.array([rng.uniform(lo, hi) for lo, hi in lo_hi]),
    ]) if n else np.zeros(0)
    for _ in range(n_rows):
        nnz = int(rng.integers(1, min(n, 4) + 1))
        idx = rng.choice(n, size=nnz, replace=False)
        coeffs = {int(j): float(rng.integers(-5, 6)) or 1.0 for j in idx}
        rel = str(rng.choice([LE, GE, EQ] if anchor else [LE, GE]))
        lhs = sum(v * x0[j] for j, v in coeffs.items())
        if anchor:
            rhs = lhs + abs(rng.normal(0, 2)) if rel == LE else (
                lhs - abs(rng.normal(0, 2)) if rel == GE else lhs)
        else:
            rhs = float(rng.normal(0, 3))
        m.add_constraint(coeffs, rel, rhs)
    return m


def lp_vertex_oracle(model):
    """Independent LP oracle: enumerate candidate active sets (rows + bounds),
    solve the square systems, keep feasible points, return the best value."""
    std = model.standard_form()
    n = std.n
    cands = [(std.a[i], std.b[i]) for i in range(std.m)]
    eye = np.eye(n)
    for j in range(n):
        if math.isfinite(std.lb[j]):
            cands.append((eye[j], std.lb[j]))
        if math.isfinite(std.ub[j]):
            cands.append((eye[j], std.ub[j]))
    best = None
    for combo in itertools.combinations(range(len(cands)), n):
        a = np.array([cands[i][0] for i in combo])
        b = np.array([cands[i][1] for i in combo])
        if abs(np.linalg.det(a)) < 1e-9:
            continue
        x = np.linalg.solve(a, b)
        if np.any(x < std.lb - 1e-7) or np.any(x > std.ub + 1e-7):
            continue
        lhs = std.a @ x if std.m else np.zeros(0)
        ok = True
        for i, rel in enumerate(std.relations):
            r = lhs[i] - std.b[i]
            if (rel == LE and r > 1e-7) or (rel == GE and r < -1e-7) or (rel == EQ and abs(r) > 1e-7):
                ok = False
                break
        if ok:
            val = float(std.c @ x)
            best = val if best is None else min(best, val)
    return best


def milp_enum_oracle(model):
    """Exhaustive oracle: LP for every binary assignment, best value wins."""
    std = model.standard_form()
    bin_idx = model.binary_indices()
    best = math.inf
    for bits in itertools.product((0.0, 1.0), repeat=len(bin_idx)):
        lo, hi = std.lb.copy(), std.ub.copy()
        lo[bin_idx] = bits
        hi[bin_idx] = bits
        res = solve_lp_std(std, lo, hi)
        if res.status == "optimal":
            best = min(best, res.objective)
    return best if math.isfinite(best) else None


class TestSolveLp:
    def test_min_above_floor(self):
        m = MilpModel()
        x = m.add_variable("x", 0, 10)
        m.set_objective({x: 1.0})
        m.add_constraint({x: 1.0}, GE, 3.0)
        r = solve_lp(m)
        assert r.status == "optimal"
        assert r.objective == pytest.approx(3.0)
        assert r.x[0] == pytest.approx(3.0)
        assert r.duals is not None and r.duals[0] == pytest.approx(1.0)

    def test_two_variable_facet(self):
        m = MilpModel()
        x = m.add_variable("x", 0, 1)
        y = m.add_variable("y", 0, 1)
        m.set_objective({x: -1.0, y: -1.0})
        m.add_constraint({x: 1.0, y: 1.0}, LE, 1.0)
        r = solve_lp(m)
        assert r.status == "optimal"
        assert r.objective == pytest.approx(-1.0)
        assert r.x[0] + r.x[1] == pytest.approx(1.0)

    def test_infeasible_box(self):
        m = MilpModel()
        x = m.add_variable("x", 0, 10)
        m.set_objective({x: 1.0})
        m.add_constraint({x: 1.0}, GE, 2.0)
        m.add_constraint({x: 1.0}, LE, 1.0)
        assert solve_lp(m).status == "infeasible"

    def test_unbounded(self):
        m = MilpModel()
        x = m.add_variable("x", -math.inf, math.inf)
        m.set_objective({x: 1.0})
        m.add_constraint({x: 1.0}, LE, 5.0)
        assert solve_lp(m).status == "unbounded"

    def test_free_variable_pinned_by_equalities(self):
        # min x subject to x = 1 + 2y, y in [0,4]: optimum at y=0, x=1
        m = MilpModel()
        x = m.add_variable("x", -math.inf, math.inf)
        y = m.add_variable("y", 0, 4)
        m.set_objective({x: 1.0})
        m.add_constraint({x: 1.0, y: -2.0}, EQ, 1.0)
        r = solve_lp(m)
        assert r.status == "optimal"
        assert r.objective == pytest.approx(1.0)
        assert r.x[1] == pytest.approx(0.0)

    def test_matches_vertex_oracle_on_random_lps(self):
        rng = np.random.default_rng(2024)
        for trial in range(120):
            m = random_model(rng, 0, int(rng.integers(1, 4)), int(rng.integers(1, 4)),
                             anchor=bool(rng.integers(0, 2)))
            mine = solve_lp(m)
            oracle = lp_vertex_oracle(m)
            if oracle is None:
                assert mine.status == "infeasible", f"trial {trial}"
            else:
                assert mine.status == "optimal", f"trial {trial}"
                assert mine.objective == pytest.approx(oracle, abs=1e-6), f"trial {trial}"


class TestSolveMilp:
    def test_binary_knapsack_pair(self):
        m = MilpModel()
        a = m.add_variable("a", 0, 1, binary=True)
        b = m.add_variable("b", 0, 1, binary=True)
        m.set_objective({a: -3.0, b: -2.0})
        m.add_constraint({a: 1.0, b: 1.0}, LE, 1.0)
        s = solve_milp(m, EXACT)
        assert s.status == "Optimal"
        assert s.objective == pytest.approx(-3.0)
        assert s.values.tolist() == [1.0, 0.0]

    def test_all_continuous_equals_lp(self):
        rng = np.random.default_rng(7)
        m = random_model(rng, 0, 3, 3)
        lp = solve_lp(m)
        s = solve_milp(m, EXACT)
        assert s.status == "Optimal"
        assert s.objective == pytest.approx(lp.objective, abs=1e-9)
        assert np.allclose(s.values, lp.x, atol=1e-9)

    def test_six_binary_knapsack_vs_enumeration(self):
        rng = np.random.default_rng(99)
        m = MilpModel()
        weights = rng.integers(1, 8, 6)
        values = rng.integers(1, 9, 6)
        idx = [m.add_variable(f"b{i}", 0, 1, binary=True) for i in range(6)]
        m.set_objective({j: -float(values[i]) for i, j in enumerate(idx)})
        m.add_constraint({j: float(weights[i]) for i, j in enumerate(idx)}, LE, 12.0)
        s = solve_milp(m, EXACT)
        assert s.objective == pytest.approx(milp_enum_oracle(m), abs=1e-9)

    def test_infeasible_integer(self):
        m = MilpModel()
        a = m.add_variable("a", 0, 1, binary=True)
        m.set_objective({a: 1.0})
        m.add_constraint({a: 2.0}, EQ, 1.0)  # needs a = 0.5
        s = solve_milp(m, EXACT)
        assert s.status == "Infeasible"
        assert not s.has_incumbent

    def test_matches_enumeration_on_random_models(self):
        rng = np.random.default_rng(31415)
        for trial in range(80):
            m = random_model(rng, int(rng.integers(1, 7)), int(rng.integers(0, 3)),
                             int(rng.integers(1, 6)), anchor=bool(rng.integers(0, 2)))
            s = solve_milp(m, EXACT)
            oracle = milp_enum_oracle(m)
            if oracle is None:
                assert s.status == "Infeasible", f"trial {trial}"
            else:
                assert s.status == "Optimal", f"trial {trial}"
                assert s.objective == pytest.approx(oracle, abs=1e-6), f"trial {trial}"

    def test_determinism(self):
        rng = np.random.default_rng(555)
        m = random_model(rng, 6, 2, 5)
        a = solve_milp(m, EXACT)
        b = solve_milp(m, EXACT)
        assert a.status == b.status
        assert a.objective == b.objective
        assert a.nodes_explored == b.nodes_explored
        assert np.array_equal(a.values, b.values)

    def test_objective_scaling_leaves_argmin(self):
        rng = np.random.default_rng(777)
        base = random_model(rng, 5, 2, 4)
        res = solve_milp(base, EXACT)
        std = base.standard_form()
        for scale in (0.5, 3.7):
            scaled = random_model(np.random.default_rng(777), 5, 2, 4)
            scaled.set_objective({j: float(std.c[j]) * scale
                                  for j in range(base.n_variables) if std.c[j]})
            res2 = solve_milp(scaled, EXACT)
            assert np.allclose(res.values, res2.values, atol=1e-9)
            assert res2.objective == pytest.approx(res.objective * scale, rel=1e-9)

    def test_weak_duality_and_monotone_bound(self):
        rng = np.random.default_rng(4242)
        for _ in range(20):
            m = random_model(rng, int(rng.integers(2, 8)), 2, 4)
            s = solve_milp(m, EXACT)
            if not s.has_incumbent:
                continue
            assert s.best_bound <= s.objective + 1e-9
            bounds = [b for b, _inc in s.bound_history]
            assert all(b2 >= b1 - 1e-9 for b1, b2 in zip(bounds, bounds[1:]))
            for b, inc in s.bound_history:
                assert b <= inc + 1e-9

    def test_initial_solution_seeds_incumbent(self):
        m = MilpModel()
        a = m.add_variable("a", 0, 1, binary=True)
        b = m.add_variable("b", 0, 1, binary=True)
        m.set_objective({a: -1.0, b: -1.0})
        m.add_constraint({a: 1.0, b: 1.0}, LE, 2.0)
        seed = np.array([1.0, 0.0])
        s = solve_milp(m, EXACT, initial_solution=[seed, np.array([1.0, 1.0])])
        assert s.objective == pytest.approx(-2.0)

    def test_infeasible_seed_ignored(self):
        m = MilpModel()
        a = m.add_variable("a", 0, 1, binary=True)
        m.set_objective({a: -1.0})
        m.add_constraint({a: 1.0}, LE, 0.0)
        s = solve_milp(m, EXACT, initial_solution=np.array([1.0]))
        assert s.status == "Optimal"
        assert s.objective == pytest.approx(0.0)

    def test_node_budget_reports_time_limit_status(self):
        rng = np.random.default_rng(11)
        m = random_model(rng, 12, 2, 8)
        s = solve_milp(m, SolverOptions(rel_gap_limit=1e-12, time_limit=60.0, node_limit=3))
        assert s.status in ("TimeLimit", "Optimal", "GapLimit", "Infeasible")
        if s.status == "TimeLimit":
            assert s.nodes_explored >= 3

    def test_gap_semantics_on_terminated_solves(self):
        rng = np.random.default_rng(2718)
        opts = SolverOptions(rel_gap_limit=0.01, time_limit=60.0)
        checked = 0
        for _ in range(25):
            m = random_model(rng, int(rng.integers(2, 10)), 2, 5)
            s = solve_milp(m, opts)
            if s.status in ("Optimal", "GapLimit"):
                assert (s.objective - s.best_bound) / max(abs(s.objective), 1e-10) \
                    <= 0.01 + 1e-9
                checked += 1
        assert checked > 0


class TestCheckSolution:
    def _model(self):
        m = MilpModel()
        a = m.add_variable("a", 0, 1, binary=True)
        x = m.add_variable("x", 0, 5)
        m.set_objective({x: 1.0})
        m.add_constraint({a: 1.0, x: 1.0}, LE, 3.0)
        return m

    def test_feasible_point_empty_report(self):
        m = self._model()
        assert check_solution(m, np.array([1.0, 2.0])) == []

    def test_fractional_binary_flagged(self):
        m = self._model()
        report = check_solution(m, np.array([0.4, 1.0]))
        assert any(v.kind == "integrality" for v in report)

    def test_tiny_violation_within_tol_ignored(self):
        m = self._model()
        assert check_solution(m, np.array([1.0, 2.0 + 1e-9]), tol=1e-7) == []

    def test_row_and_bound_violations(self):
        m = self._model()
        report = check_solution(m, np.array([1.0, 6.0]))
        kinds = {v.kind for v in report}
        assert "bound" in kinds and "row" in kinds

    def test_wrong_length_rejected(self):
        with pytest.raises(MilpError):
            check_solution(self._model(), np.array([1.0]))


class TestModelPlumbing:
    def test_lp_dump_lists_everything(self, tmp_path):
        m = MilpModel(name="demo")
        a = m.add_variable("a", 0, 1, binary=True)
        x = m.add_variable("x", -1, 2.5)
        m.set_objective({a: 3.0, x: -1.0})
        m.add_constraint({a: 2.0, x: 1.0}, LE, 4.0, name="cap")
        text = m.to_lp_text()
        for token in ("minimize", "cap:", "binary:", "a", "x", "<= 4"):
            assert token in text
        path = m.dump(tmp_path / "m.lp")
        assert path.read_text() == text

    def test_binary_bounds_enforced(self):
        m = MilpModel()
        with pytest.raises(MilpError):
            m.add_variable("b", 0, 2, binary=True)

    def test_crossed_bounds_rejected(self):
        m = MilpModel()
        with pytest.raises(MilpError):
            m.add_variable("x", 3, 1)

    def test_nonfinite_coeff_rejected(self):
        m = MilpModel()
        x = m.add_variable("x")
        with pytest.raises(MilpError):
            m.add_constraint({x: math.inf}, LE, 1.0)
