from typing import Optional, Sequence

import numpy as np


def format_number(value: Optional[float], digits: int = 4) -> str:
    """Format a scalar compactly, switching to scientific notation for very small/large magnitudes"""
    if value is None:
        return "N/A"
    value = float(value)
    if not np.isfinite(value):
        return str(value)
    if value != 0.0 and (abs(value) < 1e-3 or abs(value) >= 1e5):
        return f"{value:.{digits}e}"
    return f"{value:.{digits}f}"


def format_vector(values: Sequence[float], digits: int = 4) -> str:
    """Format a vector as [a, b, c]"""
    return "[" + ", ".join(format_number(v, digits) for v in np.ravel(values)) + "]"


def format_matrix(matrix: np.ndarray, digits: int = 4) -> str:
    """Format a matrix one row per line"""
    rows = np.atleast_2d(matrix)
    return "\n".join(format_vector(row, digits) for row in rows)


def format_duration(seconds: float) -> str:
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 120.0:
        return f"{seconds:.2f} s"
    return f"{seconds / 60:.1f} min"
