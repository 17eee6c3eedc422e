"""Dense complex matrix kernel: Hermitian eigendecomposition, pseudoinverse,
norms, distances, and density-matrix utilities used by every other module."""
from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = [
    "as_complex_matrix",
    "hermiticity_defect",
    "frobenius_norm",
    "hermitian_eig",
    "svd_pseudoinverse",
    "check_density_matrix",
    "trace_distance",
    "random_density_matrix",
    "nearest_density_matrix",
    "matrix_to_json",
    "matrix_from_json",
]


def as_complex_matrix(m) -> np.ndarray:
    """Coerce input to a 2-D complex array with finite entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains NaN or Inf entries")
    return a


def hermiticity_defect(m: np.ndarray) -> float:
    """Largest entrywise deviation |M - M^dag|."""
    return float(np.abs(m - m.conj().T).max())


def frobenius_norm(m) -> float:
    """sqrt(sum of |entry|^2)."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex)))


def hermitian_eig(m, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues, eigenvectors): real eigenvalues in ascending
    order and an orthonormal set of eigenvectors as matrix columns.
    Rejects non-square or non-Hermitian input, naming the violated
    check and its magnitude.
    """
    a = as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix is not square: shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValidationError(
            f"matrix is not Hermitian: max |M - M^dag| entry = {defect:.3e} > {tol:.1e}"
        )
    return np.linalg.eigh(a)


def svd_pseudoinverse(m, tol: float = 1e-10) -> tuple[np.ndarray, int, np.ndarray]:
    """Moore-Penrose pseudoinverse via SVD with a relative rank cutoff.

    Returns (pinv, rank, singular_values). Rank counts singular values
    above tol * (largest singular value); the remainder are treated as
    an exact nullspace. An all-zero matrix yields the zero matrix of
    transposed shape and rank 0.
    """
    if tol <= 0:
        raise ValidationError(f"rank tolerance must be positive, got {tol}")
    a = as_complex_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=complex), 0, s
    rank = int(np.count_nonzero(s > tol * s[0]))
    inv = np.zeros_like(s)
    inv[:rank] = 1.0 / s[:rank]
    pinv = (vh.conj().T * inv) @ u.conj().T
    return pinv, rank, s


def check_density_matrix(rho, dim: int | None = None, tol: float = 1e-10) -> np.ndarray:
    """Validate Hermiticity, unit trace, and positivity; return the array."""
    a = as_complex_matrix(rho)
    if a.shape[0] != a.shape[1]:
        raise ValidationError(f"density matrix is not square: shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValidationError(f"expected dimension {dim}, got {a.shape[0]}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValidationError(f"density matrix not Hermitian: defect {defect:.3e}")
    tr = complex(a.trace())
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"density matrix trace {tr:.12g} is not 1")
    wmin = float(np.linalg.eigvalsh(a)[0])
    if wmin < -tol:
        raise ValidationError(f"density matrix has negative eigenvalue {wmin:.3e}")
    return a


def trace_distance(a, b) -> float:
    """Half the absolute-eigenvalue sum of (a - b)."""
    x = as_complex_matrix(a)
    y = as_complex_matrix(b)
    if x.shape != y.shape or x.shape[0] != x.shape[1]:
        raise ValidationError(f"dimension mismatch: {x.shape} vs {y.shape}")
    d = x - y
    if hermiticity_defect(d) > 1e-8:
        raise ValidationError("difference of the two states is not Hermitian")
    return float(0.5 * np.abs(np.linalg.eigvalsh(d)).sum())


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random state: Ginibre matrix G, then G G^dag / Tr."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / rho.trace().real


def nearest_density_matrix(m) -> np.ndarray:
    """Project onto density matrices: hermitize, clip negative eigenvalues,
    renormalize the trace."""
    a = as_complex_matrix(m)
    h = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0.0:
        raise NumericalError("projection collapsed to the zero matrix")
    rho = (v * w) @ v.conj().T
    return rho / total


def matrix_to_json(m) -> dict:
    """Serialize to {"rows": R, "cols": C, "data": [[re, im], ...]} row-major."""
    a = as_complex_matrix(m)
    data = [[float(z.real), float(z.imag)] for z in a.ravel()]
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": data}


def matrix_from_json(obj) -> np.ndarray:
    """Parse the row-major [[re, im], ...] matrix object."""
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix object: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise ValidationError(f"matrix shape ({rows}, {cols}) is not positive")
    if len(data) != rows * cols:
        raise ValidationError(
            f"matrix data has {len(data)} entries, expected {rows * cols}"
        )
    try:
        flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix entry: {exc}") from exc
    return as_complex_matrix(flat.reshape(rows, cols))
