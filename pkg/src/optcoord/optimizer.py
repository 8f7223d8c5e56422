"""Neighbour-only discrete-time primal-dual consensus optimiser.

Each agent ``i`` keeps a primal row ``y_i`` and a multiplier row ``lam_i`` and
updates them from its own values plus its neighbours' messages::

    y_i   <- y_i   - beta * (sum_j l_ij y_j + sum_j l_ij lam_j + grad f_i(y_i))
    lam_i <- lam_i + beta *  sum_j l_ij y_j

The sums run over the agent itself (weight ``l_ii``) and its neighbours, so
stacking all agents gives ``Y <- Y - beta (L Y + L Lam + grad F(Y))``,
``Lam <- Lam + beta L Y``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .costs import CostSet
from .graph import LaplacianView


@dataclass(frozen=True)
class NeighborMessage:
    sender: int
    primal_value: np.ndarray
    multiplier_value: np.ndarray


@dataclass(frozen=True, eq=False)
class PrimalDualState:
    primal: np.ndarray
    multiplier: np.ndarray
    step: float

    def __post_init__(self):
        p = np.array(self.primal, dtype=float)
        m = np.array(self.multiplier, dtype=float)
        if p.ndim != 2 or p.shape != m.shape:
            raise ValueError(f"primal {p.shape} and multiplier {m.shape} must be equal N x q matrices")
        if not self.step > 0:
            raise ValueError(f"step size must be positive, got {self.step}")
        object.__setattr__(self, "primal", p)
        object.__setattr__(self, "multiplier", m)
        object.__setattr__(self, "step", float(self.step))

    @classmethod
    def zeros(cls, n_agents: int, dim: int, step: float) -> "PrimalDualState":
        return cls(np.zeros((n_agents, dim)), np.zeros((n_agents, dim)), step)


def local_update(own_primal, own_multiplier, own_weight: float,
                 messages: Sequence[tuple[float, NeighborMessage]],
                 gradient, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """One round for a single agent.

    ``messages`` pairs each neighbour message with its Laplacian weight
    ``l_ij``. Nothing else about the network is visible here.
    """
    if not beta > 0:
        raise ValueError(f"step size must be positive, got {beta}")
    y = np.asarray(own_primal, dtype=float)
    lam = np.asarray(own_multiplier, dtype=float)
    g = np.asarray(gradient, dtype=float)
    if y.ndim != 1 or lam.shape != y.shape or g.shape != y.shape:
        raise ValueError("own primal, multiplier and gradient must be vectors of equal dimension")
    consensus = own_weight * y
    dual = own_weight * lam
    for weight, msg in messages:
        if msg.primal_value.shape != y.shape or msg.multiplier_value.shape != y.shape:
            raise ValueError(f"message from agent {msg.sender} has the wrong dimension")
        consensus = consensus + weight * msg.primal_value
        dual = dual + weight * msg.multiplier_value
    new_primal = y - beta * (consensus + dual + g)
    new_multiplier = lam + beta * consensus
    return new_primal, new_multiplier


def neighbor_table(lap: LaplacianView) -> list[list[tuple[int, float]]]:
    """For every agent, its neighbours and Laplacian weights in ascending index order."""
    table = []
    for i in range(lap.n):
        row = lap.row(i)
        table.append([(j, float(row[j])) for j in range(lap.n) if j != i and row[j] != 0.0])
    return table


def step_all(state: PrimalDualState, lap: LaplacianView, costs: CostSet,
             neighbors: list[list[tuple[int, float]]] | None = None) -> PrimalDualState:
    """Synchronous round: every agent reads the pre-step state only."""
    y, lam = state.primal, state.multiplier
    n, q = y.shape
    if n != lap.n or n != len(costs) or q != costs.dim:
        raise ValueError(f"state shape {y.shape} does not match graph ({lap.n}) / costs ({len(costs)}, {costs.dim})")
    if neighbors is None:
        neighbors = neighbor_table(lap)
    new_y = np.empty_like(y)
    new_lam = np.empty_like(lam)
    for i in range(n):
        msgs = [(w, NeighborMessage(j, y[j], lam[j])) for j, w in neighbors[i]]
        new_y[i], new_lam[i] = local_update(y[i], lam[i], float(lap.row(i)[i]), msgs,
                                            costs[i].grad(y[i]), state.step)
    return PrimalDualState(new_y, new_lam, state.step)


def equilibrium_residual(state: PrimalDualState, lap: LaplacianView,
                         costs: CostSet) -> tuple[float, float]:
    """``(||L Y||, ||L Y + L Lam + grad F(Y)||)``, Frobenius norms."""
    ly = lap.entries @ state.primal
    llam = lap.entries @ state.multiplier
    stat = ly + llam + costs.gradients(state.primal)
    return float(np.linalg.norm(ly)), float(np.linalg.norm(stat))


def lyapunov_matrix(lap: LaplacianView, beta: float) -> np.ndarray:
    """``I - beta L + beta^2 L^2`` (the per-coordinate block of the weighting)."""
    lam_max = float(lap.spectrum[-1])
    if not beta > 0 or (lam_max > 0 and beta >= 1.0 / (2.0 * lam_max)):
        raise ValueError(f"step size {beta} outside the admissible range for this graph")
    l = lap.entries
    return np.eye(lap.n) - beta * l + beta * beta * (l @ l)


def lyapunov_value(primal, multiplier, saddle: tuple[np.ndarray, np.ndarray],
                   lap: LaplacianView, beta: float) -> float:
    """``<Y - Y*, W (Y - Y*)> + ||Lam - Lam*||^2``.

    The monotone sequence pairs the primal at round k with the multiplier at
    round k + 1; callers pick the pairing.
    """
    w = lyapunov_matrix(lap, beta)
    dy = np.asarray(primal, dtype=float) - saddle[0]
    dl = np.asarray(multiplier, dtype=float) - saddle[1]
    return float(np.sum(dy * (w @ dy)) + np.sum(dl * dl))


def converge_to_saddle(state: PrimalDualState, lap: LaplacianView, costs: CostSet,
                       tol: float = 1e-10, max_steps: int = 200_000) -> PrimalDualState:
    """Keep stepping until both equilibrium residuals fall below ``tol``."""
    neighbors = neighbor_table(lap)
    for _ in range(max_steps):
        if max(equilibrium_residual(state, lap, costs)) < tol:
            return state
        state = step_all(state, lap, costs, neighbors)
    raise RuntimeError(f"no saddle within {max_steps} steps (residual tolerance {tol})")


def run_optimizer(state: PrimalDualState, lap: LaplacianView, costs: CostSet,
                  steps: int) -> list[PrimalDualState]:
    """Trajectory ``[state(0), ..., state(steps)]`` of the standalone optimiser."""
    neighbors = neighbor_table(lap)
    out = [state]
    for _ in range(steps):
        state = step_all(state, lap, costs, neighbors)
        out.append(state)
    return out
