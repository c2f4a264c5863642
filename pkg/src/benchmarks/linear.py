import numpy as np

from models.errors import ConfigurationError
from models.system_models import NonlinearModel


def linear_test(A_c, B_c, dt: float = 0.01) -> NonlinearModel:
    """
    Linear model x' = A_c x + B_c diag(phi) u

    Its discrete Jacobian pair is (I + dt A_c, dt B_c diag(phi)) everywhere.
    """
    A_c = np.atleast_2d(np.asarray(A_c, dtype=float))
    B_c = np.atleast_2d(np.asarray(B_c, dtype=float))
    n, p = B_c.shape
    if A_c.shape != (n, n):
        raise ConfigurationError(f"linear-test matrices disagree: A is {A_c.shape}, B is {B_c.shape}")

    def f_eval(x):
        return A_c @ x

    def df_dx(x):
        return A_c.copy()

    def g_eval(x, phi):
        return B_c * phi[None, :]

    def dg_dx_cols(x, phi):
        return [np.zeros((n, n)) for _ in range(p)]

    return NonlinearModel("linear-test", n, p, f_eval, g_eval, df_dx, dg_dx_cols, dt)


def discrete_linear_test(A_d, B_d, dt: float = 0.01) -> NonlinearModel:
    """Linear model whose Euler discretization is exactly x+ = A_d x + B_d diag(phi) u"""
    A_d = np.atleast_2d(np.asarray(A_d, dtype=float))
    B_d = np.atleast_2d(np.asarray(B_d, dtype=float))
    return linear_test((A_d - np.eye(A_d.shape[0])) / dt, B_d / dt, dt)


def analytic_kappas_linear(B_c, dt: float = 0.01):
    """(kappa_A, kappa_B) of the linear model: A is constant, B scales one column at a time"""
    B_c = np.atleast_2d(np.asarray(B_c, dtype=float))
    return 0.0, dt * float(np.max(np.linalg.norm(B_c, axis=0)))
