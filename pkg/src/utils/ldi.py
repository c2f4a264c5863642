"""
Saturation LDI helpers: sign-pattern enumeration, clamping, and the certificate matrix.

The certificate matrix for a Jacobian pair (A, B) and sign pattern E_j is

    [ tau Q        0         M^T ]
    [ 0       (1 - tau) I     0  ]      M = A Q + B E_j Y + B E_j^- Z
    [ M            0          Q  ]
"""

import numpy as np

from models.errors import AssemblyError, ConfigurationError, ContractViolation
from models.ldi_models import SignMatrixSet
from models.system_models import InputBox

MAX_ACTUATORS = 16
SYMMETRY_TOL = 1e-9


def enumerate_sign_matrices(p: int) -> SignMatrixSet:
    """All 2^p diagonal 0/1 matrices in binary order"""
    if not 1 <= p <= MAX_ACTUATORS:
        raise ConfigurationError(f"sign-matrix enumeration supports 1 <= p <= {MAX_ACTUATORS}, got {p}")
    codes = np.arange(2 ** p)
    bits = (codes[:, None] >> np.arange(p)[None, :]) & 1
    matrices = np.zeros((2 ** p, p, p))
    matrices[:, np.arange(p), np.arange(p)] = bits
    return SignMatrixSet(p, matrices)


def saturate(u: np.ndarray, box: InputBox) -> np.ndarray:
    """Componentwise clamp to [-u_max, u_max]"""
    return np.clip(np.asarray(u, dtype=float), -box.u_max, box.u_max)


def build_xi(
    Q: np.ndarray,
    Y: np.ndarray,
    Z: np.ndarray,
    A: np.ndarray,
    B: np.ndarray,
    E: np.ndarray,
    tau: float
) -> np.ndarray:
    """
    Assemble the 3n x 3n certificate matrix

    Args:
        Q: n x n ellipsoid shape matrix
        Y: p x n linear-region gain variable
        Z: p x n saturated-region gain variable
        A: n x n state Jacobian
        B: n x p input matrix
        E: p x p sign pattern
        tau: contraction rate in [0, 1]

    Returns:
        Symmetric matrix (upper triangle assembled, then mirrored)
    """
    n = Q.shape[0]
    p = B.shape[1]
    if Q.shape != (n, n) or A.shape != (n, n) or B.shape != (n, p):
        raise AssemblyError(f"inconsistent shapes Q{Q.shape} A{A.shape} B{B.shape}")
    if Y.shape != (p, n) or Z.shape != (p, n) or E.shape != (p, p):
        raise AssemblyError(f"inconsistent shapes Y{Y.shape} Z{Z.shape} E{E.shape} for n={n}, p={p}")
    if not 0.0 <= tau <= 1.0:
        raise ContractViolation(f"tau must lie in [0, 1], got {tau}")

    M = A @ Q + B @ E @ Y + B @ (np.eye(p) - E) @ Z
    xi = np.zeros((3 * n, 3 * n))
    xi[:n, :n] = tau * Q
    xi[:n, 2 * n:] = M.T
    xi[n:2 * n, n:2 * n] = (1.0 - tau) * np.eye(n)
    xi[2 * n:, 2 * n:] = Q
    return np.triu(xi) + np.triu(xi, 1).T


def reduced_xi_stack(Q: np.ndarray, M: np.ndarray, tau: float) -> np.ndarray:
    """
    Outer 2n x 2n blocks [[tau Q, M^T], [M, Q]] for a stack of M

    The (1 - tau) I middle block decouples, so
    min_eig(full) = min(1 - tau, min_eig(reduced)).
    """
    n = Q.shape[0]
    lead = M.shape[:-2]
    stack = np.empty(lead + (2 * n, 2 * n))
    stack[..., :n, :n] = tau * Q
    stack[..., :n, n:] = np.swapaxes(M, -1, -2)
    stack[..., n:, :n] = M
    stack[..., n:, n:] = Q
    return stack


def min_eig(M: np.ndarray, tol: float = SYMMETRY_TOL) -> float:
    """Smallest eigenvalue of a symmetric matrix"""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ContractViolation(f"min_eig needs a square matrix, got shape {M.shape}")
    scale = max(1.0, float(np.max(np.abs(M))))
    asymmetry = float(np.max(np.abs(M - M.T)))
    if asymmetry > tol * scale:
        raise ContractViolation(f"matrix is not symmetric (max asymmetry {asymmetry:.3e})")
    return float(np.linalg.eigvalsh(M)[0])


def operator_norm(M: np.ndarray) -> float:
    """Largest singular value"""
    return float(np.linalg.norm(np.atleast_2d(M), 2))
