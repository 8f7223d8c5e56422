import numpy as np
import pytest

from optcoord.costs import CostSet
from optcoord.graph import Topology, build_laplacian
from optcoord.regulation import AgentDynamics
from optcoord.scenario_io import load_scenario, shipped_scenario_path

CASE_A_REFS = [[10, 1], [5, 10], [10, 2], [3, 5]]
CASE_A_MATRIX = [[0, 1], [2, 1]]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def case_a_dynamics():
    return AgentDynamics(CASE_A_MATRIX, np.eye(2), np.eye(2))


@pytest.fixture
def case_a_costs():
    return CostSet.from_references(CASE_A_REFS)


@pytest.fixture
def ring4_lap():
    return build_laplacian(Topology.ring(4))


@pytest.fixture
def pair_lap():
    return build_laplacian(Topology.path(2))


@pytest.fixture(scope="session")
def shipped():
    return {name: load_scenario(shipped_scenario_path(name))
            for name in ("case_a", "case_b", "single_integrator_pair", "mixed")}


def cycle_eigenvalues(n):
    """Analytic spectrum of the unit-weight n-cycle Laplacian."""
    return np.sort([2 - 2 * np.cos(2 * np.pi * k / n) for k in range(n)])
