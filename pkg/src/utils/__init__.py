# Export all utility functions for easy imports
from .ldi import (
    enumerate_sign_matrices,
    saturate,
    build_xi,
    reduced_xi_stack,
    min_eig,
    operator_norm
)

from .formatting import format_number, format_vector, format_matrix, format_duration
