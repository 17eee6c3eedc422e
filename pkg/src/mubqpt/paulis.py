"""Single-qubit Pauli matrices and tensor-product Pauli strings."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}


def pauli_string(label: str) -> np.ndarray:
    """Tensor product of single-qubit Paulis, e.g. "ZX" -> sigma_z (x) sigma_x.

    The first letter acts on the most significant qubit.
    """
    if not label or any(ch not in PAULI for ch in label):
        raise ValidationError(f"invalid Pauli string {label!r}")
    out = PAULI[label[0]]
    for ch in label[1:]:
        out = np.kron(out, PAULI[ch])
    return out
