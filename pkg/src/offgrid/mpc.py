"""Optimizing controller: horizon MILP build, solve, and command extraction.

Per within-horizon step i (0-based, N steps) the decision variables are the
binary load commands u_fr[i], u_s[i], the battery charge fraction gamma[i]
in [-1, 2], the PV energy drawn g[i] in [0, G[i]], the upper-band temperature
slack zeta[i] >= 0, and the successor states e_bat[i] (battery) and t_fr[i]
(fridge temperature, bounded below by the hard band edge). The stage cost is

    lambda1*(N-i)*zeta[i] - lambda2*soc[i] + lambda3*gamma[i]
    - lambda4*(N-i)*u_s[i]

with soc[i] = e_bat[i]/e_max: the battery reward is taken on the
state-of-charge fraction, not raw Wh, so that with unit weights all four
terms are commensurate (degrees, fractions, binaries) and the controller
trades a few Wh for band-keeping instead of hoarding stored energy while the
fridge drifts warm. Slack and secondary-load service near the start of the
horizon dominate the same terms later on. The controller's battery model uses a single
efficiency (eta_controller, default 1) and no inverter losses; the plant
applies the real efficiencies, and that deliberate mismatch is part of the
architecture: only the sign/magnitude class of gamma reaches the charge
controller, which then moves whatever energy is actually available.
"""

from __future__ import annotations

import logging
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .config import SystemConfig
from .devices import FridgeDiscretization, fridge_discretize, fridge_energy
from .errors import InfeasiblePlanError, MilpError
from .milp import MilpModel, MilpSolution, SolverOptions, check_solution, solve_milp
from .scenario import ForecastWindow

if TYPE_CHECKING:  # runtime import would be circular (plant imports controllers)
    from .plant import PlantState

log = logging.getLogger(__name__)

GAMMA_SNAP_TOL = 1e-9


def gamma_to_discrete(gamma: float) -> tuple[int, int, int]:
    """Map the continuous charge fraction to (c, d, x_bat) charge-controller flags.

    c=1 for gamma > 0, d=1 for gamma < 0; x_bat is 1 in (0,1] (normal charge),
    2 in (1,2] (fast charge), 0 otherwise. gamma must lie in [-1, 2].
    """
    if gamma < -1.0 - GAMMA_SNAP_TOL or gamma > 2.0 + GAMMA_SNAP_TOL:
        raise ValueError(f"gamma {gamma} outside [-1, 2]")
    gamma = min(2.0, max(-1.0, gamma))
    c = 1 if gamma > 0 else 0
    d = 1 if gamma < 0 else 0
    if 0 < gamma <= 1:
        x_bat = 1
    elif 1 < gamma <= 2:
        x_bat = 2
    else:
        x_bat = 0
    return c, d, x_bat


@dataclass(frozen=True)
class ControlCommand:
    """One step of commands as applied to the plant."""

    u_fr: int
    u_s: int
    gamma: float
    c: int
    d: int
    x_bat: int

    def __post_init__(self):
        if self.u_fr not in (0, 1) or self.u_s not in (0, 1):
            raise ValueError("load commands must be binary")
        if self.c * self.d != 0:
            raise ValueError("charge and discharge flags are mutually exclusive")
        if gamma_to_discrete(self.gamma) != (self.c, self.d, self.x_bat):
            raise ValueError("(c, d, x_bat) inconsistent with gamma")

    @classmethod
    def from_gamma(cls, u_fr: int, u_s: int, gamma: float) -> "ControlCommand":
        c, d, x_bat = gamma_to_discrete(gamma)
        return cls(u_fr=u_fr, u_s=u_s, gamma=gamma, c=c, d=d, x_bat=x_bat)


@dataclass
class MpcPlan:
    """Solved horizon: commands, predicted trajectories and solver metadata."""

    commands: list[ControlCommand]
    predicted_e_bat: np.ndarray
    predicted_t_fr: np.ndarray
    slack: np.ndarray
    g_used: np.ndarray
    solver: MilpSolution
    fallback_used: bool = False

    @property
    def first(self) -> ControlCommand:
        return self.commands[0]


@dataclass(frozen=True)
class _Indices:
    u_fr: np.ndarray
    u_s: np.ndarray
    gamma: np.ndarray
    g: np.ndarray
    zeta: np.ndarray
    e_bat: np.ndarray
    t_fr: np.ndarray


def _build(e_bat0: float, t_fr0: float, forecast: ForecastWindow,
           config: SystemConfig) -> tuple[MilpModel, _Indices]:
    n = len(forecast)
    if n < 1:
        raise MilpError("forecast must cover at least one step")
    p = config.mpc
    bat = config.battery
    disc = fridge_discretize(config.fridge, config.step_hours)
    e_fr = fridge_energy(config.fridge, config.step_hours)
    ec = bat.e_charge_max_wh
    g_av = forecast.g_avail_wh
    t_house = forecast.t_house_c
    e_s = forecast.e_secondary_wh

    m = MilpModel(name=f"horizon{n}")
    u_fr = np.array([m.add_variable(f"u_fr[{i}]", 0, 1, binary=True) for i in range(n)])
    u_s = np.array([
        m.add_variable(f"u_s[{i}]", 0, 1.0 if e_s[i] > 0 else 0.0, binary=True)
        for i in range(n)
    ])
    gamma = np.array([
        m.add_variable(f"gamma[{i}]", p.gamma_min, p.gamma_max) for i in range(n)
    ])
    g = np.array([m.add_variable(f"g[{i}]", 0.0, float(g_av[i])) for i in range(n)])
    zeta = np.array([m.add_variable(f"zeta[{i}]", 0.0, np.inf) for i in range(n)])
    e_bat = np.array([
        m.add_variable(f"e_bat[{i}]", bat.e_min_wh, bat.e_max_wh) for i in range(n)
    ])
    # The hard lower band edge lives on the variable; the soft upper edge
    # needs the slack and stays a row.
    t_fr = np.array([
        m.add_variable(f"t_fr[{i}]", config.fridge.t_min_c, np.inf) for i in range(n)
    ])

    for i in range(n):
        w = float(n - i)  # steps-from-now weight
        m.set_objective_coeff(int(zeta[i]), p.lambda1 * w)
        m.set_objective_coeff(int(e_bat[i]), -p.lambda2 / bat.e_max_wh)
        m.set_objective_coeff(int(gamma[i]), p.lambda3)
        if e_s[i] > 0:
            m.set_objective_coeff(int(u_s[i]), -p.lambda4 * w)

    bq = disc.b * disc.q_fr_w
    for i in range(n):
        # fridge thermal dynamics
        row = {int(t_fr[i]): 1.0, int(u_fr[i]): -bq}
        rhs = disc.d * float(t_house[i])
        if i == 0:
            rhs += disc.a * t_fr0
        else:
            row[int(t_fr[i - 1])] = -disc.a
        m.add_constraint(row, "=", rhs, name=f"thermal[{i}]")

        # battery dynamics with the controller-side efficiency
        row = {int(e_bat[i]): 1.0, int(gamma[i]): -p.eta_controller * ec}
        rhs = e_bat0 if i == 0 else 0.0
        if i > 0:
            row[int(e_bat[i - 1])] = -1.0
        m.add_constraint(row, "=", rhs, name=f"battery[{i}]")

        # energy balance: loads + charging draw exactly the PV energy used
        row = {int(u_fr[i]): e_fr, int(gamma[i]): ec, int(g[i]): -1.0}
        if e_s[i] > 0:
            row[int(u_s[i])] = float(e_s[i])
        m.add_constraint(row, "=", 0.0, name=f"balance[{i}]")

        # temperature band: the lower edge is the t_fr variable bound (hard);
        # only the slack-softened upper edge needs a row
        m.add_constraint({int(t_fr[i]): 1.0, int(zeta[i]): -1.0}, "<=",
                         config.fridge.t_max_c, name=f"band_up[{i}]")

    return m, _Indices(u_fr, u_s, gamma, g, zeta, e_bat, t_fr)


def build_mpc_milp(state: "PlantState", forecast: ForecastWindow,
                   config: SystemConfig) -> MilpModel:
    """Construct the horizon MILP for the given state and forecast."""
    _check_state(state, config)
    model, _ = _build(state.e_bat_wh, state.t_fr_c, forecast, config)
    return model


def _check_state(state: "PlantState", config: SystemConfig) -> None:
    bat = config.battery
    if not (bat.e_min_wh - 1e-6 <= state.e_bat_wh <= bat.e_max_wh + 1e-6):
        raise MilpError(f"battery state {state.e_bat_wh} Wh outside its bounds")
    if not np.isfinite(state.t_fr_c):
        raise MilpError("fridge temperature must be finite")


def _greedy_rollout(e_bat0: float, t_fr0: float, forecast: ForecastWindow,
                    config: SystemConfig, indices: _Indices, n_vars: int,
                    serve_plan: np.ndarray,
                    fridge_priority: bool = True) -> tuple[np.ndarray, int | None] | None:
    """Simulate a deadband-plus-greedy-charging policy through the horizon.

    The compressor runs only when the off-trajectory would leave the band
    upward (respecting the hard lower edge); the secondary circuit follows
    `serve_plan` where the charge-fraction box admits it; charging takes all
    admissible PV. Under scarcity the fridge is kept ahead of the secondary
    circuit unless `fridge_priority` is off (the horizon cost can genuinely
    prefer a small slack excursion over shedding a heavily-weighted fan step).
    Returns the assembled decision vector and the first step (if any) at
    which the fridge had to be dropped for lack of energy.
    """
    p = config.mpc
    bat = config.battery
    disc = fridge_discretize(config.fridge, config.step_hours)
    e_fr = fridge_energy(config.fridge, config.step_hours)
    ec = bat.e_charge_max_wh
    n = len(forecast)
    x = np.zeros(n_vars)
    t = t_fr0
    e = e_bat0
    first_fridge_fail: int | None = None
    for i in range(n):
        g_max = float(forecast.g_avail_wh[i])
        e_s = float(forecast.e_secondary_wh[i])
        th = float(forecast.t_house_c[i])
        t_on = disc.a * t + disc.b * disc.q_fr_w + disc.d * th
        t_off = disc.a * t + disc.d * th
        u_db = 1 if (t_off > config.fridge.t_max_c and t_on >= config.fridge.t_min_c) else 0
        s_want = 1 if (e_s > 0 and serve_plan[i]) else 0
        if fridge_priority:
            candidates = ((u_db, s_want), (u_db, 0), (0, 0))
        else:
            candidates = ((u_db, s_want), (0, s_want), (u_db, 0), (0, 0))
        for u, s in candidates:
            load = u * e_fr + s * e_s
            lo = max(p.gamma_min, -load / ec,
                     (bat.e_min_wh - e) / (p.eta_controller * ec))
            hi = min(p.gamma_max, (g_max - load) / ec,
                     (bat.e_max_wh - e) / (p.eta_controller * ec))
            if lo <= hi + 1e-12:
                break
        else:
            return None
        if u < u_db and first_fridge_fail is None:
            first_fridge_fail = i
        gam = hi  # greediest admissible charge; equals the needed discharge at night
        t_next = t_on if u else t_off
        if t_next < config.fridge.t_min_c - 1e-9:
            return None
        e = e + p.eta_controller * ec * gam
        x[indices.u_fr[i]] = u
        x[indices.u_s[i]] = s
        x[indices.gamma[i]] = gam
        x[indices.g[i]] = u * e_fr + s * e_s + ec * gam
        x[indices.zeta[i]] = max(0.0, t_next - config.fridge.t_max_c)
        x[indices.e_bat[i]] = e
        x[indices.t_fr[i]] = t_next
        t = t_next
    return x, first_fridge_fail


def _greedy_seeds(e_bat0: float, t_fr0: float, forecast: ForecastWindow,
                  config: SystemConfig, indices: _Indices,
                  n_vars: int) -> list[np.ndarray]:
    """Candidate incumbents for the solver, cheapest-first quality ladder:

    1. rationed: serve the secondary loads as much as possible without ever
       dropping the fridge for lack of energy - built by serving everything
       and then unserving the latest served step before each fridge failure
       (late service carries the smallest reward under the (N-i) weights);
    2. serve-first-K: serve only the first K scheduled steps of the window,
       for a ladder of K values and both fridge/fans priorities - the shape
       the time-varying weights actually favor under scarcity;
    3. serve-everything and fridge-only rollouts as cheap fallbacks.
    """
    n = len(forecast)
    seeds: list[np.ndarray] = []

    serve = forecast.e_secondary_wh > 0
    rationed = None
    for _ in range(n + 1):
        out = _greedy_rollout(e_bat0, t_fr0, forecast, config, indices, n_vars, serve)
        if out is None:
            break
        rationed, fail = out
        if fail is None:
            break
        served_before = np.flatnonzero(serve[: fail + 1])
        if served_before.size == 0:
            break
        serve = serve.copy()
        serve[served_before[-1]] = False
    if rationed is not None:
        seeds.append(rationed)

    scheduled = np.flatnonzero(forecast.e_secondary_wh > 0)
    prefix_ks = sorted({0, 2, 4, 6, 9, 12, 18, 24, len(scheduled)} & set(range(len(scheduled) + 1)))
    for k in prefix_ks:
        plan_k = np.zeros(n, dtype=bool)
        plan_k[scheduled[:k]] = True
        for priority in (True, False):
            out = _greedy_rollout(e_bat0, t_fr0, forecast, config, indices, n_vars,
                                  plan_k, fridge_priority=priority)
            if out is not None:
                seeds.append(out[0])

    all_on = np.ones(n, dtype=bool)
    out = _greedy_rollout(e_bat0, t_fr0, forecast, config, indices, n_vars,
                          all_on, fridge_priority=False)
    if out is not None:
        seeds.append(out[0])
    out = _greedy_rollout(e_bat0, t_fr0, forecast, config, indices, n_vars, all_on)
    if out is not None:
        seeds.append(out[0])
    return seeds


def _fallback_command(state: "PlantState", forecast: ForecastWindow,
                      config: SystemConfig) -> ControlCommand:
    """Degraded one-step rule when the solver produced no incumbent at all:
    dead-band fridge (off inside the band), secondary off, greedy normal-mode
    charging with the current PV surplus."""
    f = config.fridge
    if state.t_fr_c >= f.t_max_c:
        u_fr = 1
    else:
        u_fr = 0
    e_fr = fridge_energy(f, config.step_hours)
    surplus = float(forecast.g_avail_wh[0]) - u_fr * e_fr
    gamma = float(np.clip(surplus / config.battery.e_charge_max_wh, -1.0, 1.0))
    return ControlCommand.from_gamma(u_fr=u_fr, u_s=0, gamma=gamma)


def plan(state: "PlantState", forecast: ForecastWindow, config: SystemConfig,
         options: SolverOptions | None = None,
         dump_dir: str | Path | None = None) -> MpcPlan:
    """Solve the horizon problem and extract per-step commands.

    Raises InfeasiblePlanError (with an LP-format model dump) if the MILP has
    no feasible point; falls back to a dead-band command when the solver hits
    its budget without any incumbent.
    """
    _check_state(state, config)
    options = options or SolverOptions()
    model, ix = _build(state.e_bat_wh, state.t_fr_c, forecast, config)
    seeds = _greedy_seeds(state.e_bat_wh, state.t_fr_c, forecast, config, ix,
                          model.n_variables)
    solution = solve_milp(model, options, initial_solution=seeds)

    if solution.status == "Infeasible":
        directory = Path(dump_dir) if dump_dir else Path(tempfile.gettempdir())
        dump = model.dump(directory / f"infeasible_{int(time.time())}.lp")
        raise InfeasiblePlanError(
            f"horizon problem infeasible (dump: {dump})", dump_path=str(dump))
    if solution.status in ("Unbounded", "NumericalFailure"):
        raise MilpError(f"solver failed: {solution.status} ({solution.message})")
    if not solution.has_incumbent:
        log.warning("no incumbent within budget; using dead-band fallback command")
        cmd = _fallback_command(state, forecast, config)
        n = len(forecast)
        return MpcPlan(
            commands=[cmd],
            predicted_e_bat=np.full(n, np.nan),
            predicted_t_fr=np.full(n, np.nan),
            slack=np.full(n, np.nan),
            g_used=np.full(n, np.nan),
            solver=solution,
            fallback_used=True,
        )

    values = solution.values
    violations = check_solution(model, values, options.feasibility_tol * 10,
                                options.integrality_tol * 10)
    if violations:
        raise MilpError(f"incumbent failed the feasibility audit: {violations[:3]}")

    n = len(forecast)
    u_fr = np.round(values[ix.u_fr]).astype(int)
    u_s = np.round(values[ix.u_s]).astype(int)
    gammas = np.clip(values[ix.gamma], config.mpc.gamma_min, config.mpc.gamma_max)
    for snap in (0.0, 1.0, 2.0, -1.0):
        near = np.abs(gammas - snap) < GAMMA_SNAP_TOL
        gammas[near] = snap
    commands = [
        ControlCommand.from_gamma(int(u_fr[i]), int(u_s[i]), float(gammas[i]))
        for i in range(n)
    ]

    _audit_dynamics(state, forecast, config, values, ix, commands)
    return MpcPlan(
        commands=commands,
        predicted_e_bat=values[ix.e_bat].copy(),
        predicted_t_fr=values[ix.t_fr].copy(),
        slack=values[ix.zeta].copy(),
        g_used=values[ix.g].copy(),
        solver=solution,
    )


def _audit_dynamics(state: "PlantState", forecast: ForecastWindow,
                    config: SystemConfig, values: np.ndarray, ix: _Indices,
                    commands: list[ControlCommand], tol: float = 2e-4) -> None:
    """Re-simulate the model dynamics under the extracted commands and require
    agreement with the solver's state trajectory (extraction consistency).

    The default tolerance covers the worst legal case of a binary sitting at
    the integrality tolerance and being rounded in the command (the rounding
    propagates as |b*q|*tol/(1-a) through the thermal recursion); exact solves
    agree to 1e-6 and the test suite pins that tighter bound separately.
    """
    disc = fridge_discretize(config.fridge, config.step_hours)
    ec = config.battery.e_charge_max_wh
    eta = config.mpc.eta_controller
    t = state.t_fr_c
    e = state.e_bat_wh
    for i, cmd in enumerate(commands):
        t = disc.a * t + disc.b * cmd.u_fr * disc.q_fr_w + disc.d * float(forecast.t_house_c[i])
        e = e + eta * ec * float(values[ix.gamma[i]])
        if abs(t - values[ix.t_fr[i]]) > tol or abs(e - values[ix.e_bat[i]]) > tol:
            raise MilpError(
                f"extracted plan diverges from solver trajectory at step {i}: "
                f"T {t:.8f} vs {values[ix.t_fr[i]]:.8f}, "
                f"E {e:.6f} vs {values[ix.e_bat[i]]:.6f}"
            )
        if values[ix.zeta[i]] < -1e-9:
            raise MilpError("negative temperature slack in solution")


class MpcController:
    """Receding-horizon controller: one plan per plant step, first command applied."""

    def __init__(self, config: SystemConfig, options: SolverOptions | None = None,
                 forecast_noise=None, dump_dir: str | Path | None = None):
        self.config = config
        self.options = options or SolverOptions()
        self.forecast_noise = forecast_noise
        self.dump_dir = dump_dir
        self.last_plan: MpcPlan | None = None

    def decide(self, state: "PlantState", scenario, k: int):
        from .plant import ControllerDecision

        forecast = scenario.forecast(k, self.config.horizon_steps)
        if self.forecast_noise is not None:
            forecast = self.forecast_noise(forecast, k)
        p = plan(state, forecast, self.config, self.options, dump_dir=self.dump_dir)
        self.last_plan = p
        cmd = p.first
        return ControllerDecision(
            command=cmd,
            requested_u_fr=cmd.u_fr,
            requested_u_s=cmd.u_s,
            solver=p.solver,
            fallback=p.fallback_used,
        )
