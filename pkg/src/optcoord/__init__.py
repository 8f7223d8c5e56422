"""Distributed primal-dual coordination of heterogeneous discrete-time linear agents."""

from .costs import CostSet, QuadraticTrackingCost, global_optimum, lipschitz_constant, reschedule
from .graph import LaplacianView, Topology, build_laplacian, is_connected, laplacian_spectrum, max_step_size
from .optimizer import (NeighborMessage, PrimalDualState, equilibrium_residual, local_update,
                        lyapunov_value, step_all)
from .regulation import (AgentDynamics, RegulationError, RegulatorSolution, check_controllable,
                         check_regulation_rank, is_schur, solve_regulator, synthesize, synthesize_K)
from .sim import (AgentSpec, CoordinatorState, LinearAgent, Reschedule, Scenario,
                  ScenarioValidationError, TrajectoryLog, agent_round, coordinator_round, run,
                  tracking_error, validate_scenario)

__version__ = "0.1.0"

__all__ = [
    "AgentDynamics", "AgentSpec", "CoordinatorState", "CostSet", "LaplacianView", "LinearAgent",
    "NeighborMessage", "PrimalDualState", "QuadraticTrackingCost", "RegulationError",
    "RegulatorSolution", "Reschedule", "Scenario", "ScenarioValidationError", "Topology",
    "TrajectoryLog", "agent_round", "build_laplacian", "check_controllable",
    "check_regulation_rank", "coordinator_round", "equilibrium_residual", "global_optimum",
    "is_connected", "is_schur", "laplacian_spectrum", "lipschitz_constant", "local_update",
    "lyapunov_value", "max_step_size", "reschedule", "run", "solve_regulator", "step_all",
    "synthesize", "synthesize_K", "tracking_error", "validate_scenario",
]
