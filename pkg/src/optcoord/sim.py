"""Synchronous closed-loop simulation of coordinators and linear agents.

Every round, in order:

1. reschedule events due this round replace local references;
2. the state of round ``k`` is logged (when ``k`` hits the record stride);
3. coordinators take one primal-dual step on ``(xi, lambda)``;
4. every agent applies ``u = -K x + Pi xi`` and steps its plant.

All reads in steps 3-4 come from the round-``k`` snapshot. Single-integrator
agents have no plant of their own: their output is the coordinator's primal
value and their input is the primal increment ``v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .costs import CostSet, global_optimum, lipschitz_constant, reschedule
from .graph import LaplacianView, Topology, build_laplacian, is_connected, max_step_size
from .optimizer import PrimalDualState, neighbor_table, step_all
from .regulation import (AgentDynamics, RegulationError, RegulatorSolution, check_controllable,
                         check_regulation_rank, is_schur, solve_regulator, synthesize_K)


class ScenarioValidationError(ValueError):
    """A scenario violates a standing assumption; the message names which."""


@dataclass(frozen=True)
class AgentSpec:
    """Plant description for one agent; ``dynamics=None`` marks a single integrator."""

    dynamics: AgentDynamics | None = None
    K: np.ndarray | None = None

    @property
    def is_single_integrator(self) -> bool:
        return self.dynamics is None


@dataclass(frozen=True)
class Reschedule:
    round: int
    agent: int
    reference: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class Scenario:
    topology: Topology
    costs: CostSet
    agents: tuple[AgentSpec, ...]
    beta: float
    horizon: int
    record_stride: int = 1
    reschedules: tuple[Reschedule, ...] = ()
    x0: tuple[np.ndarray, ...] | None = None
    xi0: np.ndarray | None = None
    lambda0: np.ndarray | None = None
    state_weight: float = 1.0
    input_weight: float = 1.0
    name: str = "scenario"

    @property
    def n_agents(self) -> int:
        return self.topology.n_agents

    @property
    def dim(self) -> int:
        return self.costs.dim


@dataclass(frozen=True, eq=False)
class LinearAgent:
    dynamics: AgentDynamics
    gains: RegulatorSolution
    x: np.ndarray


@dataclass(frozen=True, eq=False)
class CoordinatorState:
    xi: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class TrajectoryLog:
    """Per-recorded-round snapshots.

    Arrays indexed ``[record, agent, component]``; ``x`` and ``u`` are lists
    over agents because plant orders differ.
    """

    rounds: list[int] = field(default_factory=list)
    x: list[list[np.ndarray]] = field(default_factory=list)
    y: list[np.ndarray] = field(default_factory=list)
    xi: list[np.ndarray] = field(default_factory=list)
    lam: list[np.ndarray] = field(default_factory=list)
    u: list[list[np.ndarray]] = field(default_factory=list)
    e: list[np.ndarray] = field(default_factory=list)
    references: list[np.ndarray] = field(default_factory=list)
    consensus_error: list[float] = field(default_factory=list)
    optimum: list[np.ndarray] = field(default_factory=list)
    mean_output_distance: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rounds)

    def array(self, name: str) -> np.ndarray:
        return np.array(getattr(self, name))


def coordinator_round(coord: CoordinatorState, lap: LaplacianView, costs: CostSet, beta: float,
                      neighbors=None) -> CoordinatorState:
    nxt = step_all(PrimalDualState(coord.xi, coord.lam, beta), lap, costs, neighbors)
    return CoordinatorState(nxt.primal, nxt.multiplier)


def agent_round(agent: LinearAgent, xi) -> tuple[LinearAgent, np.ndarray, np.ndarray]:
    """Return ``(agent at k+1, u(k), y(k))``."""
    dyn, gains, x = agent.dynamics, agent.gains, agent.x
    xi = np.asarray(xi, dtype=float)
    u = -gains.K @ x + gains.Pi @ xi
    y = dyn.C @ x
    x_next = dyn.A @ x + dyn.B @ u
    return LinearAgent(dyn, gains, x_next), u, y


def tracking_error(agent: LinearAgent, coord_xi) -> np.ndarray:
    return agent.dynamics.C @ agent.x - np.asarray(coord_xi, dtype=float)


def validate_scenario(sc: Scenario) -> tuple[list[Check], list[RegulatorSolution | None]]:
    """Run every assumption check; returns the checks and per-agent gains (None when skipped)."""
    checks: list[Check] = []
    n = sc.n_agents
    if len(sc.agents) != n or len(sc.costs) != n:
        checks.append(Check("shape", False,
                            f"{n} graph nodes, {len(sc.agents)} agents, {len(sc.costs)} references"))
        return checks, [None] * len(sc.agents)
    lap = build_laplacian(sc.topology)
    checks.append(Check("connectivity", is_connected(sc.topology),
                        "communication graph must be undirected and connected"))
    try:
        bound = max_step_size(lap, lipschitz_constant(sc.costs))
        ok = 0 < sc.beta < bound
        checks.append(Check("step_size", ok,
                            f"beta={sc.beta:g} {'<' if ok else 'not <'} bound={bound:.12g}"))
    except ValueError as exc:
        checks.append(Check("step_size", False, str(exc)))
    gains: list[RegulatorSolution | None] = []
    for i, spec in enumerate(sc.agents):
        if spec.is_single_integrator:
            gains.append(None)
            continue
        dyn = spec.dynamics
        if dyn.q != sc.dim:
            checks.append(Check(f"agent{i}.output_dim", False, f"C has {dyn.q} rows, references have {sc.dim}"))
            gains.append(None)
            continue
        ctrl = check_controllable(dyn)
        checks.append(Check(f"agent{i}.controllable", ctrl, "(A, B) controllability rank"))
        rank = check_regulation_rank(dyn)
        checks.append(Check(f"agent{i}.regulation_rank", rank,
                            f"rank[[A-I, B], [C, 0]] == n + q = {dyn.n + dyn.q} (regulator equations)"))
        psi = g = k = None
        if rank:
            try:
                psi, g = solve_regulator(dyn)
            except RegulationError as exc:
                checks.append(Check(f"agent{i}.regulator", False, str(exc)))
        if spec.K is not None:
            k = np.asarray(spec.K, dtype=float)
            if k.shape != (dyn.p, dyn.n):
                checks.append(Check(f"agent{i}.schur", False, f"K must be {dyn.p}x{dyn.n}"))
                k = None
            else:
                checks.append(Check(f"agent{i}.schur", is_schur(dyn.A - dyn.B @ k),
                                    "A - B K Schur certificate (supplied K)"))
        elif ctrl:
            try:
                k = synthesize_K(dyn, sc.state_weight, sc.input_weight)
                checks.append(Check(f"agent{i}.schur", True, "A - B K Schur certificate (LQR K)"))
            except RegulationError as exc:
                checks.append(Check(f"agent{i}.schur", False, str(exc)))
        if psi is not None and k is not None and all(c.passed for c in checks
                                                        if c.name.startswith(f"agent{i}.")):
            gains.append(RegulatorSolution(psi, g, k))
        else:
            gains.append(None)
    for ev in sc.reschedules:
        ok = 0 <= ev.agent < n and len(ev.reference) == sc.dim and 0 <= ev.round
        if not ok:
            checks.append(Check("reschedules", False, f"bad event {ev}"))
    return checks, gains


def _initial_states(sc: Scenario, gains) -> tuple[list[np.ndarray], CoordinatorState]:
    n, q = sc.n_agents, sc.dim
    xi = np.zeros((n, q)) if sc.xi0 is None else np.array(sc.xi0, dtype=float).reshape(n, q)
    lam = np.zeros((n, q)) if sc.lambda0 is None else np.array(sc.lambda0, dtype=float).reshape(n, q)
    xs = []
    for i, spec in enumerate(sc.agents):
        if spec.is_single_integrator:
            xs.append(xi[i].copy())
        elif sc.x0 is None or sc.x0[i] is None:
            xs.append(np.zeros(spec.dynamics.n))
        else:
            x = np.array(sc.x0[i], dtype=float).reshape(-1)
            if x.size != spec.dynamics.n:
                raise ScenarioValidationError(f"agent {i}: initial state has {x.size} entries, expected {spec.dynamics.n}")
            xs.append(x)
    return xs, CoordinatorState(xi, lam)


def run(sc: Scenario) -> TrajectoryLog:
    """Simulate ``sc.horizon`` rounds and return the recorded log.

    Raises ScenarioValidationError, naming the failed checks, before round 0
    if any assumption is violated.
    """
    checks, gains = validate_scenario(sc)
    failed = [c for c in checks if not c.passed]
    if failed:
        raise ScenarioValidationError("; ".join(f"{c.name}: {c.detail}" for c in failed))
    if sc.horizon < 1 or sc.record_stride < 1:
        raise ScenarioValidationError("horizon and record_stride must be positive")

    lap = build_laplacian(sc.topology)
    neighbors = neighbor_table(lap)
    xs, coord = _initial_states(sc, gains)
    agents = [None if g is None else LinearAgent(spec.dynamics, g, x)
              for spec, g, x in zip(sc.agents, gains, xs)]
    costs = sc.costs
    events: dict[int, list[Reschedule]] = {}
    for ev in sc.reschedules:
        events.setdefault(ev.round, []).append(ev)

    log = TrajectoryLog()
    n = sc.n_agents
    for k in range(sc.horizon):
        for ev in events.get(k, ()):
            costs = reschedule(costs, ev.agent, ev.reference)
        nxt = coordinator_round(coord, lap, costs, sc.beta, neighbors)
        x_row, u_row = [], []
        y_row = np.empty((n, sc.dim))
        for i in range(n):
            if agents[i] is None:
                # single integrator: y(k+1) = y(k) + v(k), v given by the optimiser
                x_row.append(xs[i])
                u_row.append(nxt.xi[i] - coord.xi[i])
                y_row[i] = xs[i]
                xs[i] = nxt.xi[i].copy()
            else:
                agents[i], u, y = agent_round(agents[i], coord.xi[i])
                x_row.append(xs[i])
                u_row.append(u)
                y_row[i] = y
                xs[i] = agents[i].x
        if k % sc.record_stride == 0:
            _record(log, k, x_row, y_row, coord, u_row, costs, lap)
        coord = nxt
    return log


def _record(log: TrajectoryLog, k, x_row, y_row, coord, u_row, costs, lap):
    ystar = global_optimum(costs)
    log.rounds.append(k)
    log.x.append([x.copy() for x in x_row])
    log.y.append(y_row.copy())
    log.xi.append(coord.xi.copy())
    log.lam.append(coord.lam.copy())
    log.u.append([u.copy() for u in u_row])
    log.e.append(y_row - coord.xi)
    log.references.append(costs.references)
    log.consensus_error.append(float(np.linalg.norm(lap.entries @ coord.xi)))
    log.optimum.append(ystar)
    log.mean_output_distance.append(float(np.linalg.norm(y_row.mean(axis=0) - ystar)))


def expected_records(horizon: int, stride: int) -> int:
    return math.ceil(horizon / stride)
