"""Small dense linear-algebra kernels.

Everything here works on tiny matrices (order well below 100), so clarity wins
over speed. Arrays are plain ``numpy.ndarray`` of dtype float64.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg


class SingularMatrixError(ValueError):
    """Raised when a linear system is singular to working precision."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def lu_solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises SingularMatrixError when a pivot falls below ``1e-12`` times the
    largest absolute entry of ``a``.
    """
    a = as_matrix(a, "A")
    b_in = np.asarray(b, dtype=float)
    b = as_matrix(b_in, "B")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"A must be square, got {a.shape}")
    if b.shape[0] != n:
        raise ValueError(f"B has {b.shape[0]} rows, A has order {n}")
    scale = np.abs(a).max()
    if scale == 0.0:
        raise SingularMatrixError("A is the zero matrix")
    with warnings.catch_warnings():
        # exact-zero pivots are reported below as SingularMatrixError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    if np.abs(np.diag(lu)).min() < 1e-12 * scale:
        raise SingularMatrixError("A is singular to working precision")
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    return x.reshape(b_in.shape) if b_in.ndim == 1 else x


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def symmetric_eig(a, *, max_sweeps: int = 100, tol: float = 1e-12,
                  return_vectors: bool = False):
    """Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm drops below ``tol`` (scaled
    by the Frobenius norm of ``a`` when that exceeds one) or ``max_sweeps``
    full sweeps have been made.
    """
    a = as_matrix(a, "A")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"matrix must be square, got {a.shape}")
    scale = max(1.0, float(np.linalg.norm(a)))
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    m = 0.5 * (a + a.T)
    v = np.eye(n)
    threshold = tol * scale

    off_mask = ~np.eye(n, dtype=bool)

    def off_norm(x):
        return np.sqrt(np.sum(x[off_mask] ** 2))

    for _ in range(max_sweeps):
        if off_norm(m) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                m = rot.T @ m @ rot
                m[p, q] = m[q, p] = 0.0
                v = v @ rot
    w = np.diag(m).copy()
    order = np.argsort(w, kind="stable")
    if return_vectors:
        return w[order], v[:, order]
    return w[order]


def numerical_rank(a, tol: float = 1e-9) -> int:
    """Number of singular values above ``tol * sigma_max``.

    Singular values come from the Jacobi eigenvalues of ``a.T @ a``. Gram
    eigenvalues under that matrix's rounding floor (``n * eps * eig_max``) are
    treated as zero, since squaring leaves no resolution below it.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(a, "A")
    gram = a.T @ a
    gram = 0.5 * (gram + gram.T)
    eig = symmetric_eig(gram)
    emax = eig.max()
    if emax <= 0.0:
        return 0
    eig = np.where(eig > gram.shape[0] * np.finfo(float).eps * emax, eig, 0.0)
    sigma = np.sqrt(eig)
    smax = sigma.max()
    return int(np.count_nonzero(sigma > tol * smax))


def dlyap_solve(m) -> tuple[np.ndarray | None, bool]:
    """Solve ``M.T P M - P = -I`` through its vectorised form.

    Returns ``(P, is_pd)``. ``is_pd`` is True only when the symmetrised ``P``
    admits a Cholesky factor, which certifies that ``M`` is Schur stable.
    When the vectorised system is singular (some eigenvalue pair of ``M``
    multiplies to one) ``P`` is None and the certificate is refused.
    """
    m = as_matrix(m, "M")
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError(f"M must be square, got {m.shape}")
    mt = m.T
    # vec(Mt P M) = (Mt kron Mt) vec(P) for column-major vec
    lhs = np.eye(n * n) - kron(mt, mt)
    rhs = np.eye(n).reshape(-1, 1, order="F")
    try:
        p = lu_solve(lhs, rhs).reshape(n, n, order="F")
    except SingularMatrixError:
        return None, False
    p = 0.5 * (p + p.T)
    try:
        np.linalg.cholesky(p)
    except np.linalg.LinAlgError:
        return p, False
    return p, True
