"""Model container for mixed-integer linear programs.

Variables carry bounds and an optional binary marker; constraints are sparse
rows with a relation and right-hand side; the objective is always
minimization. `standard_form()` materializes cached dense arrays for the
solver; treat a model as immutable once handed to a solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import MilpError

LE = "<="
EQ = "="
GE = ">="
_RELATIONS = (LE, EQ, GE)


@dataclass(frozen=True)
class Violation:
    """One audited defect of a candidate solution."""

    kind: str       # "bound" | "row" | "integrality"
    name: str
    index: int
    amount: float

    def __str__(self) -> str:
        return f"{self.kind} violation at {self.name}: {self.amount:.3e}"


@dataclass
class StandardForm:
    """Dense arrays of the model plus the extended matrix [A | I_slack | I_art]."""

    c: np.ndarray
    a: np.ndarray
    relations: list[str]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    is_binary: np.ndarray
    names: list[str]
    a_ext: np.ndarray
    slack_lb: np.ndarray
    slack_ub: np.ndarray

    @property
    def n(self) -> int:
        return len(self.c)

    @property
    def m(self) -> int:
        return len(self.b)


class MilpModel:
    """Minimization MILP with bounded continuous and binary variables."""

    def __init__(self, name: str = "model"):
        self.name = name
        self._names: list[str] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._binary: list[bool] = []
        self._obj: dict[int, float] = {}
        self._rows: list[tuple[dict[int, float], str, float, str]] = []
        self._std: StandardForm | None = None

    # -- construction -------------------------------------------------------

    def add_variable(self, name: str | None = None, lb: float = 0.0,
                     ub: float = math.inf, binary: bool = False) -> int:
        idx = len(self._names)
        if name is None:
            name = f"x{idx}"
        if binary:
            if lb < 0 or ub > 1:
                raise MilpError(f"binary variable {name} must have bounds within [0,1]")
        if math.isnan(lb) or math.isnan(ub):
            raise MilpError(f"variable {name} has NaN bounds")
        if lb > ub:
            raise MilpError(f"variable {name} has lb {lb} > ub {ub}")
        self._names.append(name)
        self._lb.append(float(lb))
        self._ub.append(float(ub))
        self._binary.append(bool(binary))
        self._std = None
        return idx

    def add_constraint(self, coeffs: dict[int, float], relation: str, rhs: float,
                       name: str | None = None) -> int:
        if relation not in _RELATIONS:
            raise MilpError(f"unknown relation {relation!r}")
        if not math.isfinite(rhs):
            raise MilpError("constraint rhs must be finite")
        clean: dict[int, float] = {}
        for j, v in coeffs.items():
            if not 0 <= j < len(self._names):
                raise MilpError(f"constraint references unknown variable index {j}")
            if not math.isfinite(v):
                raise MilpError("constraint coefficients must be finite")
            if v != 0.0:
                clean[int(j)] = float(v)
        if name is None:
            name = f"r{len(self._rows)}"
        self._rows.append((clean, relation, float(rhs), name))
        self._std = None
        return len(self._rows) - 1

    def set_objective_coeff(self, var: int, coeff: float) -> None:
        if not math.isfinite(coeff):
            raise MilpError("objective coefficients must be finite")
        if coeff == 0.0:
            self._obj.pop(var, None)
        else:
            self._obj[var] = float(coeff)
        self._std = None

    def set_objective(self, coeffs: dict[int, float]) -> None:
        self._obj = {}
        for j, v in coeffs.items():
            self.set_objective_coeff(j, v)

    # -- introspection ------------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self._names)

    @property
    def n_constraints(self) -> int:
        return len(self._rows)

    def variable_names(self) -> list[str]:
        return list(self._names)

    def binary_indices(self) -> np.ndarray:
        return np.flatnonzero(np.array(self._binary, dtype=bool))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self._lb, dtype=float), np.array(self._ub, dtype=float)

    def standard_form(self) -> StandardForm:
        if self._std is not None:
            return self._std
        n, m = len(self._names), len(self._rows)
        c = np.zeros(n)
        for j, v in self._obj.items():
            c[j] = v
        a = np.zeros((m, n))
        b = np.zeros(m)
        relations: list[str] = []
        slack_lb = np.zeros(m)
        slack_ub = np.zeros(m)
        for i, (coeffs, rel, rhs, _nm) in enumerate(self._rows):
            for j, v in coeffs.items():
                a[i, j] = v
            b[i] = rhs
            relations.append(rel)
            if rel == LE:
                slack_lb[i], slack_ub[i] = 0.0, math.inf
            elif rel == GE:
                slack_lb[i], slack_ub[i] = -math.inf, 0.0
            else:
                slack_lb[i], slack_ub[i] = 0.0, 0.0
        a_ext = np.hstack([a, np.eye(m), np.eye(m)]) if m else np.zeros((0, n))
        self._std = StandardForm(
            c=c, a=a, relations=relations, b=b,
            lb=np.array(self._lb), ub=np.array(self._ub),
            is_binary=np.array(self._binary, dtype=bool),
            names=list(self._names),
            a_ext=a_ext, slack_lb=slack_lb, slack_ub=slack_ub,
        )
        return self._std

    # -- diagnostics --------------------------------------------------------

    def to_lp_text(self) -> str:
        """Plain-text LP-style listing for offline cross-checking."""
        lines = [f"\\ model {self.name}", "minimize:"]
        terms = [f"{v:+g} {self._names[j]}" for j, v in sorted(self._obj.items())]
        lines.append("  " + (" ".join(terms) if terms else "0"))
        lines.append("subject to:")
        for coeffs, rel, rhs, nm in self._rows:
            row = " ".join(f"{v:+g} {self._names[j]}" for j, v in sorted(coeffs.items()))
            lines.append(f"  {nm}: {row or '0'} {rel} {rhs:g}")
        lines.append("bounds:")
        for j, nm in enumerate(self._names):
            lines.append(f"  {self._lb[j]:g} <= {nm} <= {self._ub[j]:g}")
        binaries = [self._names[j] for j in range(len(self._names)) if self._binary[j]]
        if binaries:
            lines.append("binary:")
            lines.append("  " + " ".join(binaries))
        lines.append("end")
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_lp_text())
        return path


def check_solution(model: MilpModel, values: np.ndarray, tol: float = 1e-7,
                   integrality_tol: float = 1e-6) -> list[Violation]:
    """Audit a full assignment against bounds, rows and integrality.

    Independent of the solver: recomputes every row product from the model
    data. An empty report means the point is feasible within the tolerances.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (model.n_variables,):
        raise MilpError(
            f"assignment covers {values.shape} values, model has {model.n_variables}"
        )
    std = model.standard_form()
    out: list[Violation] = []
    for j in range(std.n):
        below = std.lb[j] - values[j]
        above = values[j] - std.ub[j]
        excess = max(below, above)
        if excess > tol:
            out.append(Violation("bound", std.names[j], j, float(excess)))
    if std.m:
        lhs = std.a @ values
        for i, rel in enumerate(std.relations):
            resid = lhs[i] - std.b[i]
            if rel == LE:
                excess = resid
            elif rel == GE:
                excess = -resid
            else:
                excess = abs(resid)
            if excess > tol:
                out.append(Violation("row", model._rows[i][3], i, float(excess)))
    for j in model.binary_indices():
        frac = abs(values[j] - round(values[j]))
        if frac > integrality_tol:
            out.append(Violation("integrality", std.names[j], int(j), float(frac)))
    return out
