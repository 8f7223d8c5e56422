"""Quadratic tracking costs ``f_i(y) = ||y - r_i||^2``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadraticTrackingCost:
    reference: np.ndarray

    def __init__(self, reference):
        r = np.array(reference, dtype=float).reshape(-1)
        if r.size < 1 or not np.all(np.isfinite(r)):
            raise ValueError(f"reference must be a finite non-empty vector, got {reference!r}")
        r.setflags(write=False)
        object.__setattr__(self, "reference", r)

    @property
    def dim(self) -> int:
        return self.reference.size

    def _check(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != self.reference.shape:
            raise ValueError(f"expected a vector of dimension {self.dim}, got shape {y.shape}")
        return y

    def eval(self, y) -> float:
        d = self._check(y) - self.reference
        return float(d @ d)

    def grad(self, y) -> np.ndarray:
        return 2.0 * (self._check(y) - self.reference)

    # gradient map y -> 2(y - r) is exactly 2-Lipschitz
    lipschitz = 2.0

    def __eq__(self, other):
        return (isinstance(other, QuadraticTrackingCost)
                and np.array_equal(self.reference, other.reference))

    def __hash__(self):
        return hash(self.reference.tobytes())


@dataclass(frozen=True)
class CostSet:
    costs: tuple[QuadraticTrackingCost, ...]

    def __init__(self, costs):
        costs = tuple(c if isinstance(c, QuadraticTrackingCost) else QuadraticTrackingCost(c)
                      for c in costs)
        if not costs:
            raise ValueError("a cost set needs at least one cost")
        dims = {c.dim for c in costs}
        if len(dims) != 1:
            raise ValueError(f"costs disagree on dimension: {sorted(dims)}")
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_references(cls, refs) -> "CostSet":
        return cls([QuadraticTrackingCost(r) for r in refs])

    def __len__(self) -> int:
        return len(self.costs)

    def __getitem__(self, i: int) -> QuadraticTrackingCost:
        return self.costs[i]

    @property
    def dim(self) -> int:
        return self.costs[0].dim

    @property
    def references(self) -> np.ndarray:
        return np.array([c.reference for c in self.costs])

    def total(self, y) -> float:
        return sum(c.eval(y) for c in self.costs)

    def gradients(self, ys) -> np.ndarray:
        """Row ``i`` is the gradient of cost ``i`` at row ``i`` of ``ys``."""
        return np.array([c.grad(y) for c, y in zip(self.costs, ys)])


def lipschitz_constant(costs: CostSet) -> float:
    return max(c.lipschitz for c in costs.costs)


def global_optimum(costs: CostSet) -> np.ndarray:
    """Minimiser of ``sum_i ||y - r_i||^2``, i.e. the mean reference."""
    return costs.references.mean(axis=0)


def reschedule(costs: CostSet, agent_index: int, new_reference) -> CostSet:
    if not 0 <= agent_index < len(costs):
        raise IndexError(f"agent index {agent_index} out of range for {len(costs)} agents")
    new = QuadraticTrackingCost(new_reference)
    if new.dim != costs.dim:
        raise ValueError(f"new reference has dimension {new.dim}, expected {costs.dim}")
    items = list(costs.costs)
    items[agent_index] = new
    return CostSet(items)
