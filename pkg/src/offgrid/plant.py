"""Ground-truth closed-loop plant: interaction equations, shedding, tracing.

Each step: compute the PV potential from weather, derive the house load of
the granted load set (inverter losses included), let the charge controller
move energy subject to its caps and the battery's true headroom, advance the
battery and fridge states. Commands that are not energy-feasible degrade by
shedding the secondary circuit first, then the refrigerator; unserved energy
is recorded so the metrics stay honest under controller error.

Conservation identities maintained every step (audited by the test suite):
  pv_potential == pv_used + pv_unused
  pv_used      == load_served_from_pv + battery_charge
and the battery never leaves [e_min, e_max].
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Iterable, Literal

import numpy as np

from .config import SystemConfig
from .devices import battery_step, fridge_discretize, fridge_energy, fridge_step, pv_potential
from .errors import DataError, OffgridError
from .milp import MilpSolution, SolverOptions
from .mpc import ControlCommand, MpcController
from .scenario import Scenario

log = logging.getLogger(__name__)

BOUND_EPS = 1e-9


@dataclass(frozen=True)
class PlantState:
    """Dynamic plant state x(k): battery energy and fridge temperature."""

    e_bat_wh: float
    t_fr_c: float
    step_index: int = 0


@dataclass(frozen=True)
class PlantFlows:
    """Per-step energy bookkeeping of the PV/battery/load interactions."""

    e_pv: float
    e_pv_used: float
    e_pv_unused: float
    e_hl: float
    e_charge: float
    e_discharge: float
    unserved_fr: float
    unserved_s: float


@dataclass
class ControllerDecision:
    """What a controller wanted (requested) and what it commands."""

    command: ControlCommand
    requested_u_fr: int
    requested_u_s: int
    solver: MilpSolution | None = None
    fallback: bool = False


@dataclass
class StepRecord:
    """One trace row: state at step start, commands, flows, exogenous inputs."""

    timestamp: datetime
    t_fr: float
    e_bat: float
    u_fr_req: int
    u_fr_applied: int
    u_s_req: int
    u_s_applied: int
    gamma: float
    c: int
    d: int
    x_bat: int
    e_pv: float
    e_pv_used: float
    e_hl: float
    e_c: float
    e_dc: float
    unserved_fr: float
    unserved_s: float
    ghi: float
    t_house: float
    e_s_scheduled: float
    t_fr_end: float
    e_bat_end: float
    solver_status: str = ""
    solver_objective: float = float("nan")
    solver_bound: float = float("nan")
    solver_rel_gap: float = float("nan")
    solver_nodes: int = 0
    solver_wall_s: float = 0.0
    fallback: int = 0


TRACE_COLUMNS = [
    "timestamp", "t_fr", "e_bat", "u_fr_req", "u_fr_applied", "u_s_req",
    "u_s_applied", "gamma", "c", "d", "x_bat", "e_pv", "e_pv_used", "e_hl",
    "e_c", "e_dc", "unserved_fr", "unserved_s", "ghi", "t_house",
    "e_s_scheduled", "t_fr_end", "e_bat_end", "solver_status",
    "solver_objective", "solver_bound", "solver_rel_gap", "solver_nodes",
    "solver_wall_s", "fallback",
]


@dataclass
class SimulationTrace:
    """Full closed-loop record plus the defining run parameters."""

    records: list[StepRecord]
    step_hours: float
    controller: str

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def days(self) -> float:
        return len(self.records) * self.step_hours / 24.0

    def to_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for r in self.records:
                writer.writerow([
                    r.timestamp.isoformat(sep=" "),
                    f"{r.t_fr:.10g}", f"{r.e_bat:.10g}",
                    r.u_fr_req, r.u_fr_applied, r.u_s_req, r.u_s_applied,
                    f"{r.gamma:.10g}", r.c, r.d, r.x_bat,
                    f"{r.e_pv:.10g}", f"{r.e_pv_used:.10g}", f"{r.e_hl:.10g}",
                    f"{r.e_c:.10g}", f"{r.e_dc:.10g}",
                    f"{r.unserved_fr:.10g}", f"{r.unserved_s:.10g}",
                    f"{r.ghi:.10g}", f"{r.t_house:.10g}", f"{r.e_s_scheduled:.10g}",
                    f"{r.t_fr_end:.10g}", f"{r.e_bat_end:.10g}",
                    r.solver_status, f"{r.solver_objective:.10g}",
                    f"{r.solver_bound:.10g}", f"{r.solver_rel_gap:.10g}",
                    r.solver_nodes, f"{r.solver_wall_s:.6g}", r.fallback,
                ])


def read_trace_csv(path: str | Path, step_hours: float | None = None,
                   controller: str = "") -> SimulationTrace:
    """Re-read a trace written by SimulationTrace.to_csv."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"trace file not found: {path}")
    records: list[StepRecord] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRACE_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise DataError(f"{path}: missing trace columns {sorted(missing)}")
        for row in reader:
            records.append(StepRecord(
                timestamp=datetime.fromisoformat(row["timestamp"]),
                t_fr=float(row["t_fr"]), e_bat=float(row["e_bat"]),
                u_fr_req=int(row["u_fr_req"]), u_fr_applied=int(row["u_fr_applied"]),
                u_s_req=int(row["u_s_req"]), u_s_applied=int(row["u_s_applied"]),
                gamma=float(row["gamma"]), c=int(row["c"]), d=int(row["d"]),
                x_bat=int(row["x_bat"]), e_pv=float(row["e_pv"]),
                e_pv_used=float(row["e_pv_used"]), e_hl=float(row["e_hl"]),
                e_c=float(row["e_c"]), e_dc=float(row["e_dc"]),
                unserved_fr=float(row["unserved_fr"]), unserved_s=float(row["unserved_s"]),
                ghi=float(row["ghi"]), t_house=float(row["t_house"]),
                e_s_scheduled=float(row["e_s_scheduled"]),
                t_fr_end=float(row["t_fr_end"]), e_bat_end=float(row["e_bat_end"]),
                solver_status=row["solver_status"],
                solver_objective=float(row["solver_objective"]),
                solver_bound=float(row["solver_bound"]),
                solver_rel_gap=float(row["solver_rel_gap"]),
                solver_nodes=int(row["solver_nodes"]),
                solver_wall_s=float(row["solver_wall_s"]),
                fallback=int(row["fallback"]),
            ))
    if not records:
        raise DataError(f"{path}: empty trace")
    if step_hours is None:
        if len(records) > 1:
            step_hours = (records[1].timestamp - records[0].timestamp).total_seconds() / 3600.0
        else:
            step_hours = 1.0 / 6.0
    return SimulationTrace(records=records, step_hours=step_hours, controller=controller)


def plant_step(
    state: PlantState,
    cmd: ControlCommand,
    weather,
    t_house: float,
    e_secondary: float,
    config: SystemConfig,
    requested: tuple[int, int] | None = None,
) -> tuple[PlantState, PlantFlows, int, int]:
    """Apply one command to the physical models; total, never raises on shortfall.

    Returns (next_state, flows, applied_u_fr, applied_u_s). `requested` is the
    controller's pre-shedding wish used for the unserved-energy bookkeeping
    (defaults to the command itself).
    """
    bat = config.battery
    if not (bat.e_min_wh - 1e-6 <= state.e_bat_wh <= bat.e_max_wh + 1e-6):
        raise OffgridError(f"battery state {state.e_bat_wh} outside bounds")
    e_pv = pv_potential(config.pv, weather.ghi, weather.t_ambient,
                        weather.wind_speed, config.step_hours)
    e_fr = fridge_energy(config.fridge, config.step_hours)
    req_fr, req_s = requested if requested is not None else (cmd.u_fr, cmd.u_s)

    # Deliverable battery energy this step: the headroom term carries the
    # discharge efficiency so the stored level can never cross e_min.
    deliverable = max(0.0, min((state.e_bat_wh - bat.e_min_wh) * bat.eta_discharge,
                               bat.e_discharge_max_wh))

    # An energized circuit draws power regardless of the commanded charging
    # regime: the charge controller covers granted loads beyond PV from the
    # battery (that IS the discharge regime), and the c/x_bat command only
    # governs whether and how fast PV surplus is stored. Without this, a
    # controller-side charge command issued into a small PV deficit (the
    # inverter-loss mismatch) would shed loads while the battery sits full.
    fr, s = cmd.u_fr, cmd.u_s
    for fr, s in ((cmd.u_fr, cmd.u_s), (cmd.u_fr, 0), (0, 0)):
        e_hl = (fr * e_fr + s * e_secondary) / config.inverter_efficiency
        if e_pv + deliverable >= e_hl - BOUND_EPS:
            break

    e_charge = cmd.c * max(0.0, min(e_pv - e_hl,
                                    bat.e_max_wh - state.e_bat_wh,
                                    cmd.x_bat * bat.e_charge_max_wh))
    e_discharge = max(0.0, min(e_hl - e_pv, deliverable, bat.e_discharge_max_wh))
    pv_to_load = min(e_pv, e_hl)
    e_pv_used = pv_to_load + e_charge
    e_pv_unused = e_pv - e_pv_used

    e_next = battery_step(bat, state.e_bat_wh, e_charge, e_discharge)
    e_next = min(max(e_next, bat.e_min_wh), bat.e_max_wh)  # snap roundoff only
    disc = fridge_discretize(config.fridge, config.step_hours)
    t_next = fridge_step(disc, state.t_fr_c, fr, t_house)

    flows = PlantFlows(
        e_pv=e_pv,
        e_pv_used=e_pv_used,
        e_pv_unused=e_pv_unused,
        e_hl=e_hl,
        e_charge=e_charge,
        e_discharge=e_discharge,
        unserved_fr=(req_fr - fr) * e_fr,
        unserved_s=(req_s - s) * e_secondary,
    )
    next_state = PlantState(e_bat_wh=e_next, t_fr_c=t_next,
                            step_index=state.step_index + 1)
    return next_state, flows, fr, s


ControllerName = Literal["proposed", "baseline"]


def make_controller(name: ControllerName, config: SystemConfig,
                    options: SolverOptions | None = None, forecast_noise=None):
    if name == "proposed":
        return MpcController(config, options, forecast_noise=forecast_noise)
    if name == "baseline":
        from .baseline import BaselineController

        return BaselineController(config)
    raise OffgridError(f"unknown controller {name!r}")


def initial_plant_state(config: SystemConfig, t_fr_c: float = 2.0) -> PlantState:
    """Study initial condition: battery full, fridge at 2 degC."""
    return PlantState(e_bat_wh=config.battery.e_max_wh, t_fr_c=t_fr_c, step_index=0)


def run_closed_loop(
    controller,
    scenario: Scenario,
    config: SystemConfig,
    options: SolverOptions | None = None,
    initial_state: PlantState | None = None,
    forecast_noise=None,
    progress=None,
) -> SimulationTrace:
    """Simulate the plant under a controller for the scenario's window.

    `controller` is "proposed", "baseline", or any object with a
    decide(state, scenario, k) -> ControllerDecision method.
    """
    if isinstance(controller, str):
        name = controller
        controller = make_controller(controller, config, options, forecast_noise)
    else:
        name = type(controller).__name__
    state = initial_state or initial_plant_state(config)
    records: list[StepRecord] = []
    for k in range(scenario.n_steps):
        exo = scenario.at(k)
        decision = controller.decide(state, scenario, k)
        cmd = decision.command
        next_state, flows, fr, s = plant_step(
            state, cmd, exo.weather, exo.t_house_c, exo.e_secondary_wh, config,
            requested=(decision.requested_u_fr, decision.requested_u_s),
        )
        rec = StepRecord(
            timestamp=exo.weather.timestamp,
            t_fr=state.t_fr_c,
            e_bat=state.e_bat_wh,
            u_fr_req=decision.requested_u_fr,
            u_fr_applied=fr,
            u_s_req=decision.requested_u_s,
            u_s_applied=s,
            gamma=cmd.gamma,
            c=cmd.c,
            d=cmd.d,
            x_bat=cmd.x_bat,
            e_pv=flows.e_pv,
            e_pv_used=flows.e_pv_used,
            e_hl=flows.e_hl,
            e_c=flows.e_charge,
            e_dc=flows.e_discharge,
            unserved_fr=flows.unserved_fr,
            unserved_s=flows.unserved_s,
            ghi=exo.weather.ghi,
            t_house=exo.t_house_c,
            e_s_scheduled=exo.e_secondary_wh,
            t_fr_end=next_state.t_fr_c,
            e_bat_end=next_state.e_bat_wh,
        )
        if decision.solver is not None:
            rec.solver_status = decision.solver.status
            rec.solver_objective = decision.solver.objective
            rec.solver_bound = decision.solver.best_bound
            rec.solver_rel_gap = decision.solver.rel_gap
            rec.solver_nodes = decision.solver.nodes_explored
            rec.solver_wall_s = decision.solver.wall_time
        rec.fallback = 1 if decision.fallback else 0
        records.append(rec)
        state = next_state
        if progress is not None:
            progress(k, scenario.n_steps, rec)
    return SimulationTrace(records=records, step_hours=config.step_hours, controller=name)
