import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from optcoord.numkernel import (SingularMatrixError, dlyap_solve, kron, lu_solve, numerical_rank,
                                symmetric_eig)

from conftest import cycle_eigenvalues


def test_lu_solve_identity_and_diagonal():
    b = np.array([[1.5, -2.0], [3.0, 0.25], [7.0, 1.0]])
    assert np.array_equal(lu_solve(np.eye(3), b), b)
    np.testing.assert_allclose(lu_solve([[2, 0], [0, 4]], [[2], [8]]), [[1], [2]])


def test_lu_solve_reconstructs_known_solution(rng):
    a = rng.normal(size=(8, 8)) + 8 * np.eye(8)
    x = rng.normal(size=(8, 3))
    assert np.abs(lu_solve(a, a @ x) - x).max() < 1e-9


def test_lu_solve_residual_bound_random_systems(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 21))
        a = rng.normal(size=(n, n)) + n * np.eye(n)
        b = rng.normal(size=(n, int(rng.integers(1, 4))))
        x = lu_solve(a, b)
        assert np.abs(a @ x - b).max() < 1e-9 * max(1.0, np.abs(b).max())


def test_lu_solve_rejects_singular():
    with pytest.raises(SingularMatrixError):
        lu_solve([[1, 2], [2, 4]], [[1], [1]])
    with pytest.raises(ValueError):
        lu_solve(np.ones((2, 3)), np.ones((2, 1)))


def test_kron_examples():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    expected = np.zeros((4, 4))
    expected[:2, :2] = m
    expected[2:, 2:] = m
    assert np.array_equal(kron(np.eye(2), m), expected)
    # hand expansion: [[1*3, 2*3], [1*4, 2*4]]
    assert np.array_equal(kron([[1, 2]], [[3], [4]]), [[3, 6], [4, 8]])


small = arrays(np.float64, (2, 2), elements=st.floats(-5, 5, allow_nan=False))


@settings(max_examples=100, deadline=None)
@given(small, small, small, small)
def test_kron_mixed_product(a, b, c, d):
    assert np.abs(kron(a, b) @ kron(c, d) - kron(a @ c, b @ d)).max() < 1e-10 * max(1.0, 625.0)


def test_symmetric_eig_examples():
    np.testing.assert_allclose(symmetric_eig(np.diag([3.0, 1.0, 2.0])), [1, 2, 3])
    np.testing.assert_allclose(symmetric_eig([[2, -1], [-1, 2]]), [1, 3], atol=1e-12)
    c4 = np.array([[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]], float)
    np.testing.assert_allclose(symmetric_eig(c4), cycle_eigenvalues(4), atol=1e-9)


def test_symmetric_eig_matches_characteristic_polynomial(rng):
    for _ in range(20):
        m = rng.normal(size=(5, 5))
        m = m + m.T
        w = symmetric_eig(m)
        # each eigenvalue is a root of det(m - w I)
        for v in w:
            assert abs(np.linalg.det(m - v * np.eye(5))) < 1e-8 * max(1, np.abs(m).max() ** 5)
        assert abs(w.sum() - np.trace(m)) < 1e-10


def test_symmetric_eig_vectors_diagonalise(rng):
    m = rng.normal(size=(6, 6))
    m = m + m.T
    w, v = symmetric_eig(m, return_vectors=True)
    assert np.abs(v.T @ m @ v - np.diag(w)).max() < 1e-9
    assert np.abs(v.T @ v - np.eye(6)).max() < 1e-12


def test_symmetric_eig_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        symmetric_eig([[1, 2], [0, 1]])


def test_numerical_rank():
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank([[1, 2], [2, 4]]) == 1
    case_a_block = [[-1, 1, 1, 0], [2, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
    assert numerical_rank(case_a_block) == 4
    assert numerical_rank(np.zeros((2, 3))) == 0
    assert numerical_rank([[1, 0, 0, 1], [0, 1, 2, 1]]) == 2


def test_dlyap_examples():
    p, ok = dlyap_solve(0.5 * np.eye(2))
    assert ok
    # sum_k 0.25^k = 4/3
    np.testing.assert_allclose(p, 4.0 / 3.0 * np.eye(2), atol=1e-12)
    p, ok = dlyap_solve(np.eye(2))
    assert p is None and not ok
    _, ok = dlyap_solve([[0, 1], [2, 1]])
    assert not ok


def _spectral_radius_power(m, rng, iters=200):
    """Brute-force growth estimate: largest ||M^k x||^(1/k) over a few random starts."""
    best = 0.0
    for _ in range(5):
        x = rng.normal(size=m.shape[0])
        x /= np.linalg.norm(x)
        y = x.copy()
        for _ in range(iters):
            y = m @ y
        best = max(best, np.linalg.norm(y) ** (1.0 / iters))
    return best


def test_dlyap_certificate_agrees_with_power_iteration(rng):
    for _ in range(100):
        m = rng.normal(scale=0.6, size=(3, 3))
        p, ok = dlyap_solve(m)
        rho = _spectral_radius_power(m, rng)
        x = rng.normal(size=3)
        if ok:
            assert rho < 1.0
            # 40 steps only outlast transient growth when the radius is not marginal
            horizon = 40 if rho <= 0.95 else 4000
            assert np.linalg.norm(np.linalg.matrix_power(m, horizon) @ x) < np.linalg.norm(x)
        elif p is not None:
            assert rho > 0.97
