"""Output-regulation synthesis for discrete-time linear agents.

For an agent ``x+ = A x + B u``, ``y = C x`` the controller
``u = -K x + (G + K Psi) xi`` makes the output follow the reference ``xi``
when ``A - B K`` is Schur stable and ``(Psi, G)`` solve the regulator equations

    (A - I) Psi + B G = 0,    C Psi = I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numkernel import SingularMatrixError, as_matrix, dlyap_solve, lu_solve, numerical_rank

RESIDUAL_TOL = 1e-10


class RegulationError(ValueError):
    """Raised when regulator equations or feedback synthesis cannot be satisfied."""


@dataclass(frozen=True, eq=False)
class AgentDynamics:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        a, b, c = as_matrix(self.A, "A"), as_matrix(self.B, "B"), as_matrix(self.C, "C")
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError(f"A must be square, got {a.shape}")
        if b.shape[0] != n:
            raise ValueError(f"B has {b.shape[0]} rows, expected {n}")
        if c.shape[1] != n:
            raise ValueError(f"C has {c.shape[1]} columns, expected {n}")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "B", b)
        object.__setattr__(self, "C", c)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[0]

    @classmethod
    def single_integrator(cls, q: int) -> "AgentDynamics":
        return cls(np.eye(q), np.eye(q), np.eye(q))


@dataclass(frozen=True, eq=False)
class RegulatorSolution:
    Psi: np.ndarray
    G: np.ndarray
    K: np.ndarray

    @property
    def Pi(self) -> np.ndarray:
        return self.G + self.K @ self.Psi

    def residuals(self, dyn: AgentDynamics) -> tuple[float, float]:
        r1 = (dyn.A - np.eye(dyn.n)) @ self.Psi + dyn.B @ self.G
        r2 = dyn.C @ self.Psi - np.eye(dyn.q)
        return float(np.abs(r1).max()), float(np.abs(r2).max())


def controllability_matrix(dyn: AgentDynamics) -> np.ndarray:
    blocks = [dyn.B]
    for _ in range(dyn.n - 1):
        blocks.append(dyn.A @ blocks[-1])
    return np.hstack(blocks)


def check_controllable(dyn: AgentDynamics) -> bool:
    return numerical_rank(controllability_matrix(dyn)) == dyn.n


def regulation_matrix(dyn: AgentDynamics) -> np.ndarray:
    """``[[A - I, B], [C, 0]]``."""
    return np.block([[dyn.A - np.eye(dyn.n), dyn.B],
                     [dyn.C, np.zeros((dyn.q, dyn.p))]])


def check_regulation_rank(dyn: AgentDynamics) -> bool:
    return numerical_rank(regulation_matrix(dyn)) == dyn.n + dyn.q


def solve_regulator(dyn: AgentDynamics) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(Psi, G)`` solving the regulator equations.

    The vectorised system ``(I kron O) vec(T) = vec([0; I])`` decouples by
    column, so each column of ``T = [Psi; G]`` is solved against ``O``
    directly. Square ``O`` goes through LU; a wide ``O`` (more inputs than
    outputs) takes the minimum-norm solution ``O^T (O O^T)^-1 rhs``.
    """
    if not check_regulation_rank(dyn):
        raise RegulationError(
            f"rank[[A-I, B], [C, 0]] != n + q = {dyn.n + dyn.q}; regulator equations have no solution")
    o = regulation_matrix(dyn)
    rhs = np.vstack([np.zeros((dyn.n, dyn.q)), np.eye(dyn.q)])
    try:
        if o.shape[0] == o.shape[1]:
            t = lu_solve(o, rhs)
        else:
            t = o.T @ lu_solve(o @ o.T, rhs)
    except SingularMatrixError as exc:
        raise RegulationError(f"regulator equations are numerically singular: {exc}") from exc
    psi, g = t[:dyn.n], t[dyn.n:]
    r1 = np.abs((dyn.A - np.eye(dyn.n)) @ psi + dyn.B @ g).max()
    r2 = np.abs(dyn.C @ psi - np.eye(dyn.q)).max()
    if max(r1, r2) >= RESIDUAL_TOL:
        raise RegulationError(f"regulator residuals too large: ({r1:.3e}, {r2:.3e})")
    return psi, g


def is_schur(m) -> bool:
    return dlyap_solve(m)[1]


def synthesize_K(dyn: AgentDynamics, state_weight: float = 1.0, input_weight: float = 1.0,
                 *, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Discrete LQR gain from the Riccati fixed-point iteration.

    Starting from ``P = Q`` iterate
    ``P <- A^T P A - A^T P B (R + B^T P B)^-1 B^T P A + Q`` until the largest
    entry change is below ``tol * max(1, max|P|)``; return
    ``K = (R + B^T P B)^-1 B^T P A``. The scale factor matters for unstable
    plants, where P grows large and rounding alone moves it by more than 1e-12.
    """
    if not (state_weight > 0 and input_weight > 0):
        raise ValueError("LQR weights must be positive")
    if not check_controllable(dyn):
        raise RegulationError("(A, B) is not controllable")
    a, b = dyn.A, dyn.B
    q = state_weight * np.eye(dyn.n)
    r = input_weight * np.eye(dyn.p)
    p = q.copy()
    for _ in range(max_iter):
        bpa = b.T @ p @ a
        p_next = a.T @ p @ a - bpa.T @ lu_solve(r + b.T @ p @ b, bpa) + q
        p_next = 0.5 * (p_next + p_next.T)
        done = np.abs(p_next - p).max() < tol * max(1.0, np.abs(p_next).max())
        p = p_next
        if done:
            break
    else:
        raise RegulationError(f"Riccati iteration did not converge in {max_iter} iterations")
    k = lu_solve(r + b.T @ p @ b, b.T @ p @ a)
    if not is_schur(a - b @ k):
        raise RegulationError("synthesised gain does not give a Schur-stable closed loop")
    return k


def synthesize(dyn: AgentDynamics, K=None, state_weight: float = 1.0,
               input_weight: float = 1.0) -> RegulatorSolution:
    """Full gain set for one agent; an explicit ``K`` skips the LQR step."""
    psi, g = solve_regulator(dyn)
    if K is None:
        k = synthesize_K(dyn, state_weight, input_weight)
    else:
        k = as_matrix(K, "K")
        if k.shape != (dyn.p, dyn.n):
            raise ValueError(f"K must be {dyn.p}x{dyn.n}, got {k.shape}")
        if not is_schur(dyn.A - dyn.B @ k):
            raise RegulationError("A - B K is not Schur stable for the supplied K")
    return RegulatorSolution(psi, g, k)
