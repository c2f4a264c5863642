import numpy as np
import pytest

from models import AssemblyError, ConfigurationError, ContractViolation, InputBox
from utils.ldi import build_xi, enumerate_sign_matrices, min_eig, operator_norm, reduced_xi_stack, saturate


def _jacobi_eigenvalues(M, sweeps=50):
    """Cyclic Jacobi rotations; slow but independent of LAPACK"""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(A ** 2) - np.sum(np.diag(A) ** 2))
        if off < 1e-14:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2.0 * A[p, q], A[q, q] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q], J[q, p] = s, -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))


def _random_symmetric(rng, n, scale=1.0):
    M = rng.normal(size=(n, n)) * scale
    return 0.5 * (M + M.T)


def _random_candidate(rng, n, p, eta):
    """Q, Y, Z with ||Q|| <= eta and ||Y||, ||Z|| <= eta / 2"""
    R = rng.normal(size=(n, n))
    Q = R @ R.T + 0.1 * np.eye(n)
    Q *= rng.uniform(0.1, 1.0) * eta / operator_norm(Q)
    Y = rng.normal(size=(p, n))
    Y *= rng.uniform(0.0, 1.0) * 0.5 * eta / operator_norm(Y)
    Z = rng.normal(size=(p, n))
    Z *= rng.uniform(0.0, 1.0) * 0.5 * eta / operator_norm(Z)
    return Q, Y, Z


def test_sign_matrices_p1():
    signs = enumerate_sign_matrices(1)
    assert len(signs) == 2
    assert np.array_equal(signs[0], [[0.0]])
    assert np.array_equal(signs[1], [[1.0]])
    assert np.array_equal(signs.complement(0), [[1.0]])


def test_sign_matrices_p3_binary_order():
    signs = enumerate_sign_matrices(3)
    assert len(signs) == 8
    diagonals = {tuple(np.diag(E)) for E in signs}
    assert len(diagonals) == 8
    # bit k of j is diagonal entry k
    assert np.array_equal(np.diag(signs[5]), [1.0, 0.0, 1.0])
    for j in range(8):
        assert np.array_equal(signs[j] + signs.complement(j), np.eye(3))


def test_sign_matrices_reject_bad_p():
    with pytest.raises(ConfigurationError):
        enumerate_sign_matrices(0)
    with pytest.raises(ConfigurationError):
        enumerate_sign_matrices(17)


def test_mixed_gains_match_definition():
    rng = np.random.default_rng(3)
    signs = enumerate_sign_matrices(2)
    Y = rng.normal(size=(2, 3))
    Z = rng.normal(size=(2, 3))
    stack = signs.mixed_gains(Y, Z)
    assert stack.shape == (4, 2, 3)
    for j in range(4):
        assert np.allclose(stack[j], signs[j] @ Y + signs.complement(j) @ Z)


def test_saturate_examples():
    box = InputBox([1.0, 2.0])
    assert np.array_equal(saturate([3.0, -5.0], box), [1.0, -2.0])
    assert np.array_equal(saturate([0.5, -1.0], box), [0.5, -1.0])


def test_saturate_idempotent_and_bounded():
    rng = np.random.default_rng(0)
    box = InputBox([38.0, 38.0, 10.0])
    for _ in range(200):
        u = rng.normal(scale=100.0, size=3)
        once = saturate(u, box)
        assert np.all(np.abs(once) <= box.u_max)
        assert np.array_equal(saturate(once, box), once)


def test_build_xi_scalar_example():
    xi = build_xi(np.array([[1.0]]), np.zeros((1, 1)), np.zeros((1, 1)),
                  np.array([[0.5]]), np.array([[1.0]]), np.array([[1.0]]), 0.999)
    expected = np.array([[0.999, 0.0, 0.5], [0.0, 0.001, 0.0], [0.5, 0.0, 1.0]])
    assert np.allclose(xi, expected)
    assert np.array_equal(xi, xi.T)


def test_build_xi_rejects_bad_shapes_and_tau():
    Q = np.eye(2)
    with pytest.raises(AssemblyError):
        build_xi(Q, np.zeros((1, 2)), np.zeros((1, 2)), np.eye(3), np.zeros((2, 1)), np.eye(1), 0.9)
    with pytest.raises(AssemblyError):
        build_xi(Q, np.zeros((2, 2)), np.zeros((1, 2)), np.eye(2), np.zeros((2, 1)), np.eye(1), 0.9)
    with pytest.raises(ContractViolation):
        build_xi(Q, np.zeros((1, 2)), np.zeros((1, 2)), np.eye(2), np.zeros((2, 1)), np.eye(1), 1.5)


def test_min_eig_examples():
    assert min_eig(np.diag([3.0, -1.0, 2.0])) == pytest.approx(-1.0)
    assert min_eig([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx(1.0)
    with pytest.raises(ContractViolation):
        min_eig([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ContractViolation):
        min_eig(np.ones((2, 3)))


def test_min_eig_agrees_with_jacobi_rotations():
    rng = np.random.default_rng(11)
    for n in (2, 3, 5, 6):
        for _ in range(20):
            M = _random_symmetric(rng, n, scale=rng.uniform(0.01, 100.0))
            assert min_eig(M) == pytest.approx(_jacobi_eigenvalues(M)[0], abs=1e-9 * max(1.0, np.abs(M).max()))


def test_reduced_stack_matches_full_matrix():
    rng = np.random.default_rng(5)
    signs = enumerate_sign_matrices(2)
    for _ in range(100):
        Q, Y, Z = _random_candidate(rng, 3, 2, 5.0)
        A = rng.normal(size=(3, 3))
        B = rng.normal(size=(3, 2))
        tau = rng.uniform(0.5, 1.0)
        j = int(rng.integers(4))
        full = min_eig(build_xi(Q, Y, Z, A, B, signs[j], tau))
        M = A @ Q + B @ signs.mixed_gains(Y, Z)[j]
        reduced = np.linalg.eigvalsh(reduced_xi_stack(Q, M[None], tau)[0])[0]
        assert full == pytest.approx(min(1.0 - tau, reduced), abs=1e-9)


def test_eigenvalue_shift_bounded_by_perturbation_norm():
    rng = np.random.default_rng(20240601)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 7))
        M = _random_symmetric(rng, n, scale=rng.uniform(0.1, 10.0))
        D = _random_symmetric(rng, n, scale=rng.uniform(1e-6, 1.0))
        shift = abs(np.linalg.eigvalsh(M + D)[0] - np.linalg.eigvalsh(M)[0])
        if shift > operator_norm(D) + 1e-10:
            violations += 1
    assert violations == 0


def test_certificate_eigenvalue_bounded_by_jacobian_distance():
    rng = np.random.default_rng(7)
    eta = 50.0
    violations = 0
    for _ in range(1_000):
        n = int(rng.integers(1, 5))
        p = int(rng.integers(1, 4))
        Q, Y, Z = _random_candidate(rng, n, p, eta)
        A = np.eye(n) + 0.1 * rng.normal(size=(n, n))
        B = 0.1 * rng.normal(size=(n, p))
        dA = rng.normal(size=(n, n)) * 10.0 ** rng.uniform(-6, -1)
        dB = rng.normal(size=(n, p)) * 10.0 ** rng.uniform(-6, -1)
        E = np.diag(rng.integers(0, 2, size=p).astype(float))
        tau = rng.uniform(0.9, 1.0)
        before = min_eig(build_xi(Q, Y, Z, A, B, E, tau))
        after = min_eig(build_xi(Q, Y, Z, A + dA, B + dB, E, tau))
        if abs(after - before) > eta * (operator_norm(dA) + operator_norm(dB)) + 1e-8:
            violations += 1
    assert violations == 0
