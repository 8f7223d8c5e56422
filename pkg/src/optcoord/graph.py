"""Undirected weighted communication graphs and their Laplacians."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .numkernel import symmetric_eig


@dataclass(frozen=True)
class Topology:
    """Undirected graph on ``n_agents`` nodes.

    ``edges`` holds ``(i, j, weight)`` triples normalised so that ``i < j``.
    """

    n_agents: int
    edges: tuple[tuple[int, int, float], ...]

    def __init__(self, n_agents: int, edges):
        if int(n_agents) != n_agents or n_agents < 1:
            raise ValueError(f"n_agents must be a positive integer, got {n_agents!r}")
        norm = []
        seen = set()
        for edge in edges:
            if len(edge) == 2:
                i, j = edge
                w = 1.0
            elif len(edge) == 3:
                i, j, w = edge
            else:
                raise ValueError(f"edge must be (i, j) or (i, j, weight), got {edge!r}")
            i, j, w = int(i), int(j), float(w)
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < n_agents and 0 <= j < n_agents):
                raise ValueError(f"edge ({i}, {j}) out of range for {n_agents} nodes")
            if not (w > 0 and np.isfinite(w)):
                raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
            i, j = min(i, j), max(i, j)
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            seen.add((i, j))
            norm.append((i, j, w))
        object.__setattr__(self, "n_agents", int(n_agents))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def ring(cls, n: int, weight: float = 1.0) -> "Topology":
        if n < 3:
            raise ValueError("a ring needs at least 3 nodes")
        return cls(n, [(i, (i + 1) % n, weight) for i in range(n)])

    @classmethod
    def path(cls, n: int, weight: float = 1.0) -> "Topology":
        return cls(n, [(i, i + 1, weight) for i in range(n - 1)])

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_agents, self.n_agents))
        for i, j, w in self.edges:
            a[i, j] = a[j, i] = w
        return a

    def neighbors(self, i: int) -> list[int]:
        out = []
        for a, b, _ in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)


@dataclass(frozen=True, eq=False)
class LaplacianView:
    """Dense Laplacian ``L = D - A`` with a lazily computed spectrum."""

    entries: np.ndarray
    _spectrum: list = field(default_factory=list, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def spectrum(self) -> np.ndarray:
        if not self._spectrum:
            self._spectrum.append(laplacian_spectrum(self))
        return self._spectrum[0]

    def row(self, i: int) -> np.ndarray:
        return self.entries[i]


def build_laplacian(topology: Topology) -> LaplacianView:
    a = topology.adjacency()
    lap = np.diag(a.sum(axis=1)) - a
    lap.setflags(write=False)
    return LaplacianView(lap)


def is_connected(topology: Topology) -> bool:
    """Breadth-first search from node 0."""
    adj = {i: [] for i in range(topology.n_agents)}
    for i, j, _ in topology.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == topology.n_agents


def laplacian_spectrum(lap) -> np.ndarray:
    entries = lap.entries if isinstance(lap, LaplacianView) else np.asarray(lap, dtype=float)
    return symmetric_eig(entries)


def max_step_size(lap: LaplacianView, lipschitz: float) -> float:
    """Upper bound on the primal-dual step size: ``min(1/(2 lmax), 3/(2 lipschitz))``.

    Admissible step sizes lie strictly below the returned value.
    """
    if not lipschitz > 0:
        raise ValueError(f"Lipschitz constant must be positive, got {lipschitz}")
    lmax = float(lap.spectrum[-1])
    if lmax <= 1e-12:
        raise ValueError("graph has no edges (largest Laplacian eigenvalue is 0)")
    return min(1.0 / (2.0 * lmax), 3.0 / (2.0 * lipschitz))
