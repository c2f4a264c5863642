"""
Sign-pattern matrices of the saturation LDI.
"""

from typing import Iterator

import numpy as np

from models.base_model import BaseModel


class SignMatrixSet(BaseModel):
    """All 2^p diagonal 0/1 matrices E_j; bit k of j is the k-th diagonal entry"""

    _fields = ["p"]

    def __init__(self, p: int, matrices: np.ndarray):
        self.p = p
        self.matrices = matrices
        self.complements = np.eye(p)[None, :, :] - matrices

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, j: int) -> np.ndarray:
        return self.matrices[j]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.matrices)

    def complement(self, j: int) -> np.ndarray:
        """E_j^- = I - E_j"""
        return self.complements[j]

    def mixed_gains(self, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """Stack of E_j Y + E_j^- Z for every j, shape (2^p, p, n)"""
        return self.matrices @ Y + self.complements @ Z
