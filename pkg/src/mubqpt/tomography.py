"""Process reconstruction from projector probabilities.

The D^2 + D projectors of a maximal MUB set serve three roles at once:
they are the tomography inputs, the measured observables, and the
operator basis of the process expansion

    E(rho) = sum_{a,b} chi[a, b] P_a rho P_b

over flat projector indices a, b. Measuring every input/outcome pair
gives the linear system p = beta chi with

    beta[(b, d), (a, c)] = Tr(P_a P_b P_c P_d),

a (D^2+D)^2-square matrix of rank D^4. The minimum-norm solution comes
from the Moore-Penrose pseudoinverse kappa; a positive estimate is then
obtained by descending a penalized deviation function over the
Cholesky-style parametrization chi = T^dag T.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, apply_channel
from .errors import NumericalError, ValidationError
from .mub import MubSet, n_projectors
from .numerics import (
    as_complex_matrix,
    frobenius_norm,
    hermitian_eig,
    hermiticity_defect,
    matrix_from_json,
    matrix_to_json,
    svd_pseudoinverse,
)

__all__ = [
    "ProbabilityTensor",
    "BetaMatrix",
    "ChiMatrix",
    "RefinementConfig",
    "state_probabilities",
    "reconstruct_state",
    "process_probabilities",
    "build_beta",
    "solve_chi",
    "apply_chi",
    "extract_kraus",
    "constraint_tensor",
    "refinement_objective",
    "refine_physical",
    "process_fidelity",
    "chi_to_json",
    "save_chi",
    "load_chi",
    "save_probabilities",
    "load_probabilities",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProbabilityTensor:
    """Measured probabilities p[(g,l),(e,s)] = Tr(P_s^(e) E(P_l^(g))),
    flattened to length (D^2+D)^2 with index flat(g,l)*(D^2+D) + flat(e,s)."""

    dim: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        n = n_projectors(self.dim)
        if v.shape != (n * n,):
            raise ValidationError(
                f"probability tensor has {v.shape} values, expected ({n * n},)"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("probability tensor contains NaN or Inf")
        if v.min() < -1e-10 or v.max() > 1.0 + 1e-10:
            raise ValidationError(
                f"probabilities outside [0, 1]: min {v.min():.3e}, max {v.max():.3e}"
            )
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class BetaMatrix:
    """The four-projector trace matrix with its cached pseudoinverse."""

    dim: int
    matrix: np.ndarray
    pinv: np.ndarray
    rank: int
    singular_values: np.ndarray
    pinv_identity_defect: float


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix over composite projector indices, Hermitian by
    construction; `physical` marks positive semidefinite estimates."""

    dim: int
    matrix: np.ndarray
    physical: bool = False
    asymmetry: float = 0.0
    forward_residual: float | None = None
    tp_penalty: float | None = None
    tp_max_violation: float | None = None
    converged: bool = True

    def __post_init__(self):
        m = as_complex_matrix(self.matrix)
        n = n_projectors(self.dim)
        if m.shape != (n, n):
            raise ValidationError(f"chi has shape {m.shape}, expected {(n, n)}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class RefinementConfig:
    """Settings for the positivity refinement.

    weights: penalty weight per input state (scalar broadcasts to all).
    max_iterations: cap on accepted descent steps.
    f_tol: stop when the relative decrease of f falls below this.
    """

    weights: float | np.ndarray = 10.0
    max_iterations: int = 5000
    f_tol: float = 1e-9
    initial_step: float = 1e-3


def _vectors(mub_set: MubSet) -> np.ndarray:
    return mub_set.vectors()


def state_probabilities(rho, mub_set: MubSet) -> np.ndarray:
    """p[flat(g,m)] = Tr(P_m^(g) rho) for all D^2 + D projectors."""
    r = as_complex_matrix(rho)
    if r.shape != (mub_set.dim, mub_set.dim):
        raise ValidationError(
            f"state shape {r.shape} does not match dim {mub_set.dim}"
        )
    v = _vectors(mub_set)
    return np.einsum("nd,de,ne->n", v.conj(), r, v).real


def reconstruct_state(p, mub_set: MubSet) -> np.ndarray:
    """rho = sum_{g,m} p[g,m] P_m^(g) - I.

    Exact on probabilities of a true state; Hermitian always, positivity
    is the caller's concern for noisy input.
    """
    n = n_projectors(mub_set.dim)
    arr = np.asarray(p, dtype=float)
    if arr.shape != (n,):
        raise ValidationError(f"expected {n} probabilities, got shape {arr.shape}")
    v = _vectors(mub_set)
    return np.einsum("n,nd,ne->de", arr, v, v.conj()) - np.eye(mub_set.dim)


def process_probabilities(ch: KrausChannel, mub_set: MubSet) -> ProbabilityTensor:
    """Noise-free tensor: send every projector through the channel and
    measure every projector on the output."""
    if ch.dim != mub_set.dim:
        raise ValidationError(
            f"channel dim {ch.dim} does not match basis dim {mub_set.dim}"
        )
    v = _vectors(mub_set)
    rows = []
    for vec in v:
        out = apply_channel(ch, np.outer(vec, vec.conj()))
        rows.append(state_probabilities(out, mub_set))
    return ProbabilityTensor(mub_set.dim, np.concatenate(rows))


def build_beta(mub_set: MubSet, rank_tol: float = 1e-10) -> BetaMatrix:
    """Assemble beta[(b,d),(a,c)] = Tr(P_a P_b P_c P_d) and cache its
    pseudoinverse.

    With G the Gram matrix of the basis vectors the trace factors into
    G[a,b] G[b,c] G[c,d] G[d,a]. The pseudoinverse identity
    beta kappa beta = beta is checked here once and its defect stored.
    """
    d = mub_set.dim
    n = n_projectors(d)
    v = _vectors(mub_set)
    g = v.conj() @ v.T
    beta = np.einsum("ab,bc,cd,da->bdac", g, g, g, g).reshape(n * n, n * n)
    pinv, rank, sing = svd_pseudoinverse(beta, tol=rank_tol)
    if rank != d**4:
        raise NumericalError(f"beta rank {rank}, expected D^4 = {d**4}")
    defect = frobenius_norm(beta @ pinv @ beta - beta)
    return BetaMatrix(d, beta, pinv, rank, sing, defect)


def solve_chi(beta: BetaMatrix, p: ProbabilityTensor) -> ChiMatrix:
    """Minimum-norm solve chi = kappa p, then Hermitian symmetrization.

    The recorded asymmetry is the Frobenius norm removed by
    (M + M^dag)/2; the forward residual is |beta chi - p| after
    symmetrization.
    """
    if beta.dim != p.dim:
        raise ValidationError(f"dim mismatch: beta {beta.dim}, p {p.dim}")
    if beta.pinv_identity_defect > 1e-8:
        raise NumericalError(
            f"pseudoinverse identity defect {beta.pinv_identity_defect:.3e} exceeds 1e-8"
        )
    n = n_projectors(beta.dim)
    vec = beta.pinv @ p.values
    m = vec.reshape(n, n)
    asym = frobenius_norm(m - m.conj().T)
    h = 0.5 * (m + m.conj().T)
    resid = float(np.linalg.norm(beta.matrix @ h.ravel() - p.values))
    return ChiMatrix(beta.dim, h, physical=False, asymmetry=asym, forward_residual=resid)


def apply_chi(chi: ChiMatrix, rho, mub_set: MubSet) -> np.ndarray:
    """E(rho) = sum_{a,b} chi[a,b] P_a rho P_b."""
    if chi.dim != mub_set.dim:
        raise ValidationError(f"dim mismatch: chi {chi.dim}, basis {mub_set.dim}")
    r = as_complex_matrix(rho)
    if r.shape != (mub_set.dim, mub_set.dim):
        raise ValidationError(
            f"state shape {r.shape} does not match dim {mub_set.dim}"
        )
    v = _vectors(mub_set)
    w = v.conj() @ r @ v.T  # w[a, b] = <a|rho|b>
    return np.einsum("ab,ad,be->de", chi.matrix * w, v, v.conj())


def extract_kraus(
    chi: ChiMatrix, mub_set: MubSet, eig_floor: float = 1e-8, keep_tol: float = 1e-10
) -> KrausChannel:
    """Operators from the spectral decomposition of chi:
    A_i = sqrt(l_i) sum_a v_i[a] P_a for eigenpairs with l_i > keep_tol.

    Eigenvalues in [-eig_floor, 0) are clamped to zero; anything lower is
    rejected. The overcomplete expansion makes individual operators
    gauge-dependent; only the induced map is meaningful.
    """
    if chi.dim != mub_set.dim:
        raise ValidationError(f"dim mismatch: chi {chi.dim}, basis {mub_set.dim}")
    w, u = hermitian_eig(chi.matrix)
    if w[0] < -eig_floor:
        raise NumericalError(
            f"process matrix has eigenvalue {w[0]:.3e} < -{eig_floor:.1e}; "
            "refine to a physical estimate first"
        )
    v = _vectors(mub_set)
    ops = []
    for lam, col in zip(w, u.T):
        if lam <= keep_tol:
            continue
        ops.append(np.sqrt(lam) * np.einsum("a,ad,ae->de", col, v, v.conj()))
    if not ops:
        ops = [np.zeros((chi.dim, chi.dim), dtype=complex)]
    return KrausChannel(chi.dim, tuple(ops), "extracted", {})


def constraint_tensor(mub_set: MubSet) -> np.ndarray:
    """K[b, a, c] = Tr(P_a P_b P_c), so that the trace of E(P_b) under a
    process matrix X is sum_{a,c} X[a,c] K[b,a,c]."""
    v = _vectors(mub_set)
    g = v.conj() @ v.T
    return np.einsum("ab,bc,ca->bac", g, g, g)


def _lower_cholesky_factor(a: np.ndarray) -> np.ndarray:
    """Lower-triangular T with T^dag T = a, for Hermitian positive-definite a."""
    rev = a[::-1, ::-1]
    ell = np.linalg.cholesky(rev)
    upper = ell[::-1, ::-1]
    return upper.conj().T


def refinement_objective(
    t: np.ndarray, chi_raw: np.ndarray, k: np.ndarray, weights: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Deviation function and its exact gradient over the parametrization
    chi_tilde = T^dag T, T lower triangular with real diagonal.

    f(T) = |T^dag T - chi_raw|_F^2
         + sum_b weights[b] * (sum_{a,c} (T^dag T)[a,c] K[b,a,c] - 1)^2

    Returns (f, df/dRe(T), df/dIm(T)); the real-part gradient covers the
    diagonal and strict lower triangle, the imaginary-part gradient the
    strict lower triangle only.
    """
    x = t.conj().T @ t
    delta = x - chi_raw
    c = np.einsum("ac,bac->b", x, k).real
    f = float(np.linalg.norm(delta) ** 2 + np.dot(weights, (c - 1.0) ** 2))
    s = np.einsum("b,bac->ac", weights * (c - 1.0), k)
    coeff = 4.0 * np.conj(t) @ (np.conj(delta) + s)
    n = t.shape[0]
    lower = np.tril(np.ones((n, n)))
    strict = np.tril(np.ones((n, n)), k=-1)
    return f, coeff.real * lower, -coeff.imag * strict


def refine_physical(
    chi_raw: ChiMatrix,
    p: ProbabilityTensor | None,
    beta: BetaMatrix | None,
    mub_set: MubSet,
    cfg: RefinementConfig | None = None,
) -> ChiMatrix:
    """Positive estimate nearest to chi_raw under trace-preservation penalties.

    Starts from the clipped-spectrum projection of chi_raw and runs plain
    gradient descent with step halving on non-decrease. The result is
    T^dag T, positive semidefinite by construction, with the penalty term
    value and the worst per-input trace violation recorded. When p and
    beta are supplied the forward residual |beta chi - p| is reported too.
    Hitting the iteration cap returns the best iterate with
    converged=False.
    """
    cfg = cfg or RefinementConfig()
    d = mub_set.dim
    n = n_projectors(d)
    target = as_complex_matrix(chi_raw.matrix)
    if chi_raw.dim != d:
        raise ValidationError(f"dim mismatch: chi {chi_raw.dim}, basis {d}")
    if hermiticity_defect(target) > 1e-8:
        raise ValidationError("raw process matrix must be Hermitian")
    weights = np.broadcast_to(np.asarray(cfg.weights, dtype=float), (n,)).copy()
    if np.any(weights <= 0):
        raise ValidationError("penalty weights must be positive")
    if cfg.max_iterations < 0:
        raise ValidationError("max_iterations must be >= 0")

    k = constraint_tensor(mub_set)

    # start at the clipped-spectrum projection of the raw estimate; the
    # tiny ridge keeps the Cholesky factor defined when it is singular
    w, u = np.linalg.eigh(target)
    w = np.clip(w, 0.0, None)
    start = (u * w) @ u.conj().T
    start = 0.5 * (start + start.conj().T) + 1e-12 * np.eye(n)
    t = _lower_cholesky_factor(start)

    f, g_re, g_im = refinement_objective(t, target, k, weights)
    best_t, best_f = t, f
    converged = cfg.max_iterations == 0
    step = cfg.initial_step
    iterations = 0
    while iterations < cfg.max_iterations:
        direction = g_re + 1j * g_im
        gnorm2 = float(np.vdot(direction, direction).real)
        if gnorm2 == 0.0:
            converged = True
            break
        accepted = False
        for _ in range(60):
            cand = t - step * direction
            f_new, gr_new, gi_new = refinement_objective(cand, target, k, weights)
            if f_new < f:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no descent at float resolution along the gradient
            converged = True
            break
        drop = f - f_new
        t, f, g_re, g_im = cand, f_new, gr_new, gi_new
        if f < best_f:
            best_t, best_f = t, f
        iterations += 1
        step *= 2.0
        if drop <= cfg.f_tol * max(1.0, f):
            converged = True
            break
    if not converged:
        logger.warning(
            "refinement stopped at the %d-iteration cap with f=%.3e",
            cfg.max_iterations,
            best_f,
        )

    x = best_t.conj().T @ best_t
    x = 0.5 * (x + x.conj().T)
    c = np.einsum("ac,bac->b", x, k).real
    tp_penalty = float(np.dot(weights, (c - 1.0) ** 2))
    tp_max = float(np.abs(c - 1.0).max())
    resid = None
    if p is not None and beta is not None:
        resid = float(np.linalg.norm(beta.matrix @ x.ravel() - p.values))
    return ChiMatrix(
        d,
        x,
        physical=True,
        asymmetry=0.0,
        forward_residual=resid,
        tp_penalty=tp_penalty,
        tp_max_violation=tp_max,
        converged=converged,
    )


def process_fidelity(chi_ref: ChiMatrix, chi_test: ChiMatrix) -> float:
    """F = Tr(chi_ref chi_test) / Tr(chi_ref^2), real part.

    Linear in the second argument; values land in [0, 1] only for
    physical inputs.
    """
    if chi_ref.dim != chi_test.dim:
        raise ValidationError(
            f"dim mismatch: {chi_ref.dim} vs {chi_test.dim}"
        )
    denom = complex(np.trace(chi_ref.matrix @ chi_ref.matrix))
    if abs(denom) < 1e-14:
        raise NumericalError("reference process matrix has vanishing norm")
    val = complex(np.trace(chi_ref.matrix @ chi_test.matrix))
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        logger.warning("fidelity imaginary residual %.3e", val.imag)
    return float(val.real / denom.real)


def chi_to_json(chi: ChiMatrix) -> dict:
    """Process-matrix object: matrix-json plus dim and the declared
    index order."""
    obj = matrix_to_json(chi.matrix)
    obj.update({"dim": chi.dim, "index_order": "gamma-major", "physical": chi.physical})
    return obj


def save_chi(chi: ChiMatrix, path) -> None:
    """Write the process-matrix file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(chi_to_json(chi), fh)
        fh.write("\n")


def load_chi(path) -> ChiMatrix:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read process-matrix file {path}: {exc}") from exc
    if obj.get("index_order") != "gamma-major":
        raise ValidationError(
            f"process-matrix file {path} lacks index_order 'gamma-major'"
        )
    try:
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed process-matrix file {path}: {exc}") from exc
    m = matrix_from_json(obj)
    if hermiticity_defect(m) > 1e-8:
        raise ValidationError(f"process matrix in {path} is not Hermitian")
    return ChiMatrix(dim, 0.5 * (m + m.conj().T), physical=bool(obj.get("physical", False)))


def save_probabilities(p: ProbabilityTensor, path) -> None:
    """Write {"dim": D, "values": [...]} with the flat ordering."""
    obj = {"dim": p.dim, "values": [float(x) for x in p.values]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
        fh.write("\n")


def load_probabilities(path) -> ProbabilityTensor:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read probability file {path}: {exc}") from exc
    try:
        dim = int(obj["dim"])
        values = np.asarray(obj["values"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed probability file {path}: {exc}") from exc
    return ProbabilityTensor(dim, values)
