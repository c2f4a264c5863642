from .auv import (
    DEFAULT_AUV2_PARAMS,
    DEFAULT_AUV5_PARAMS,
    default_params,
    auv2,
    auv5,
    analytic_kappa_auv2,
    analytic_kappa_b
)
from .linear import linear_test, discrete_linear_test, analytic_kappas_linear

__all__ = [
    'DEFAULT_AUV2_PARAMS',
    'DEFAULT_AUV5_PARAMS',
    'default_params',
    'auv2',
    'auv5',
    'analytic_kappa_auv2',
    'analytic_kappa_b',
    'linear_test',
    'discrete_linear_test',
    'analytic_kappas_linear'
]
