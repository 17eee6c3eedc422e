"""Noise-robustness study for the reconstruction pipeline.

Measured probabilities are corrupted by a positive additive error,
p_tilde = p + mu * zeta with zeta uniform on [0, 1), then renormalized
within each (input, outcome-basis) group. Note the perturbation is a
bias, not zero-mean noise; it is applied verbatim. Each trial re-solves
the process matrix from the corrupted tensor and scores it against the
exact one. Sweeps walk a grid of error amplitudes with a fixed number of
trials per point and fully deterministic per-trial random streams, so a
sweep is reproducible bit for bit regardless of scheduling.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, concurrence, make_cnot, parse_channel_spec
from .errors import ValidationError
from .mub import MubSet
from .numerics import check_density_matrix, nearest_density_matrix
from .tomography import (
    BetaMatrix,
    ChiMatrix,
    ProbabilityTensor,
    RefinementConfig,
    apply_chi,
    build_beta,
    process_fidelity,
    process_probabilities,
    refine_physical,
    solve_chi,
)

__all__ = [
    "NoiseConfig",
    "TrialResult",
    "SweepRow",
    "SweepAggregate",
    "SweepResult",
    "ConcurrencePoint",
    "trial_rng",
    "perturb_probabilities",
    "run_trial",
    "default_mu_grid",
    "default_channel_suite",
    "run_sweep",
    "concurrence_trace",
    "export_results",
    "import_results",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseConfig:
    """Error amplitude, base seed, and trial count for one noise point."""

    mu: float
    seed: int
    trials: int = 100

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0:
            raise ValidationError(f"error amplitude {self.mu} outside [0, 1]")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class TrialResult:
    chi: ChiMatrix
    fidelity: float


@dataclass(frozen=True)
class SweepRow:
    mu: float
    channel: str
    trial: int
    fidelity: float
    refined: bool


@dataclass(frozen=True)
class SweepAggregate:
    mu: float
    channel: str
    mean_fidelity: float
    std_fidelity: float
    trials: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    aggregates: tuple[SweepAggregate, ...]


@dataclass(frozen=True)
class ConcurrencePoint:
    mu: float
    mean_concurrence: float


def trial_rng(base_seed: int, channel_index: int, mu_index: int, trial_index: int) -> np.random.Generator:
    """Independent counter-based stream per (channel, noise level, trial).

    Streams are derived by spawn key, never by jumping, so adding trials
    or reordering execution cannot change any draw.
    """
    ss = np.random.SeedSequence(
        entropy=base_seed, spawn_key=(channel_index, mu_index, trial_index)
    )
    return np.random.Generator(np.random.Philox(ss))


def perturb_probabilities(
    p: ProbabilityTensor, mu: float, rng: np.random.Generator
) -> ProbabilityTensor:
    """p_tilde = p + mu * zeta, renormalized to unit sum within each
    (input, outcome-basis) group of D entries.

    mu = 0 returns the input values unchanged (no renormalization pass,
    which could disturb the last bits).
    """
    if mu < 0:
        raise ValidationError(f"error amplitude must be >= 0, got {mu}")
    if mu == 0.0:
        return ProbabilityTensor(p.dim, p.values.copy())
    vals = p.values + mu * rng.random(p.values.shape)
    grouped = vals.reshape(-1, p.dim)
    grouped /= grouped.sum(axis=1, keepdims=True)
    return ProbabilityTensor(p.dim, grouped.reshape(-1))


def run_trial(
    ch: KrausChannel,
    mub_set: MubSet,
    beta: BetaMatrix,
    mu: float,
    seed,
    refine: bool = False,
    exact: ProbabilityTensor | None = None,
    chi_ref: ChiMatrix | None = None,
    cfg: RefinementConfig | None = None,
) -> TrialResult:
    """One reconstruction under noise: perturb the exact tensor, solve,
    optionally refine, and score against the exact process matrix.

    `seed` may be an integer or a ready Generator. The exact tensor and
    reference solution are recomputed when not supplied.
    """
    rng = seed if isinstance(seed, np.random.Generator) else trial_rng(int(seed), 0, 0, 0)
    if exact is None:
        exact = process_probabilities(ch, mub_set)
    if chi_ref is None:
        chi_ref = solve_chi(beta, exact)
    noisy = perturb_probabilities(exact, mu, rng)
    chi = solve_chi(beta, noisy)
    if refine:
        chi = refine_physical(chi, noisy, beta, mub_set, cfg)
    return TrialResult(chi, process_fidelity(chi_ref, chi))


def default_mu_grid(start: float = 0.01, end: float = 0.15, step: float = 0.01) -> list[float]:
    """Inclusive grid of error amplitudes with rounding-clean values."""
    if step <= 0:
        raise ValidationError(f"step must be positive, got {step}")
    if end < start:
        raise ValidationError(f"empty grid: end {end} < start {start}")
    count = int(np.floor((end - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def default_channel_suite() -> list[KrausChannel]:
    """The two-qubit comparison set: lifted depolarizing(0.1), lifted
    amplitude damping(0.4), and CNOT."""
    return [
        parse_channel_spec("dep:0.1", 4),
        parse_channel_spec("ad:0.4", 4),
        make_cnot(),
    ]


def run_sweep(
    channels,
    mub_set: MubSet,
    mu_grid=None,
    trials: int = 100,
    base_seed: int = 0,
    refine: bool = False,
    threads: int | None = None,
    cfg: RefinementConfig | None = None,
    beta: BetaMatrix | None = None,
) -> SweepResult:
    """Full study: every channel at every error amplitude, `trials` times.

    Rows are ordered by (mu, channel, trial) and every trial draws from
    its own stream keyed by (base_seed, channel index, mu index, trial
    index), so identical inputs give identical results independent of the
    thread count.
    """
    channels = list(channels)
    if not channels:
        raise ValidationError("need at least one channel")
    mus = list(mu_grid) if mu_grid is not None else default_mu_grid()
    if not mus:
        raise ValidationError("noise grid is empty")
    for mu in mus:
        NoiseConfig(mu, base_seed, trials)  # range checks
    if beta is None:
        beta = build_beta(mub_set)
    prepared = []
    for ch in channels:
        exact = process_probabilities(ch, mub_set)
        prepared.append((ch, exact, solve_chi(beta, exact)))

    def one(ch_idx: int, mu_idx: int, trial: int) -> float:
        ch, exact, chi_ref = prepared[ch_idx]
        rng = trial_rng(base_seed, ch_idx, mu_idx, trial)
        return run_trial(
            ch, mub_set, beta, mus[mu_idx], rng, refine, exact=exact, chi_ref=chi_ref, cfg=cfg
        ).fidelity

    rows = []
    aggregates = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads and threads > 1 else None
    try:
        for mu_idx, mu in enumerate(mus):
            for ch_idx, (ch, _, _) in enumerate(prepared):
                if pool is None:
                    fids = [one(ch_idx, mu_idx, t) for t in range(trials)]
                else:
                    fids = list(
                        pool.map(lambda t: one(ch_idx, mu_idx, t), range(trials))
                    )
                rows.extend(
                    SweepRow(mu, ch.name, t, f, refine) for t, f in enumerate(fids)
                )
                arr = np.asarray(fids)
                aggregates.append(
                    SweepAggregate(mu, ch.name, float(arr.mean()), float(arr.std()), trials)
                )
            logger.info("noise level %g done (%d channels x %d trials)", mu, len(prepared), trials)
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(tuple(rows), tuple(aggregates))


def concurrence_trace(
    input_rho,
    ch: KrausChannel,
    mub_set: MubSet,
    mu_grid=None,
    trials: int = 100,
    base_seed: int = 0,
    beta: BetaMatrix | None = None,
) -> tuple[ConcurrencePoint, ...]:
    """Mean concurrence of the reconstructed channel output per noise level.

    Each trial applies the noisy reconstructed map to the fixed input and
    projects the result back to the nearest density matrix before
    scoring.
    """
    rho = check_density_matrix(input_rho, dim=4)
    if mub_set.dim != 4:
        raise ValidationError("concurrence trace requires the two-qubit set")
    mus = list(mu_grid) if mu_grid is not None else default_mu_grid()
    if not mus:
        raise ValidationError("noise grid is empty")
    if beta is None:
        beta = build_beta(mub_set)
    exact = process_probabilities(ch, mub_set)
    points = []
    for mu_idx, mu in enumerate(mus):
        vals = []
        for trial in range(trials):
            rng = trial_rng(base_seed, 0, mu_idx, trial)
            noisy = perturb_probabilities(exact, mu, rng)
            chi = solve_chi(beta, noisy)
            out = nearest_density_matrix(apply_chi(chi, rho, mub_set))
            vals.append(concurrence(out))
        points.append(ConcurrencePoint(mu, float(np.mean(vals))))
    return tuple(points)


def export_results(result: SweepResult, fmt: str, path, aggregates_path=None) -> None:
    """Write rows (and optionally aggregates) as CSV, or both as one JSON
    document. Output bytes depend only on the result contents."""
    if fmt == "csv":
        _write_rows_csv(result.rows, path)
        if aggregates_path is not None:
            _write_aggregates_csv(result.aggregates, aggregates_path)
    elif fmt == "json":
        obj = {
            "rows": [
                {
                    "mu": r.mu,
                    "channel": r.channel,
                    "trial": r.trial,
                    "fidelity": r.fidelity,
                    "refined": r.refined,
                }
                for r in result.rows
            ],
            "aggregates": [
                {
                    "mu": a.mu,
                    "channel": a.channel,
                    "mean_fidelity": a.mean_fidelity,
                    "std_fidelity": a.std_fidelity,
                    "trials": a.trials,
                }
                for a in result.aggregates
            ],
        }
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(obj, fh)
                fh.write("\n")
        except OSError as exc:
            raise ValidationError(f"cannot write {path}: {exc}") from exc
    else:
        raise ValidationError(f"unknown export format {fmt!r}; use csv or json")


def _write_rows_csv(rows, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("mu,channel,trial,fidelity,refined\n")
            for r in rows:
                flag = "true" if r.refined else "false"
                fh.write(f"{r.mu!r},{r.channel},{r.trial},{r.fidelity!r},{flag}\n")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def _write_aggregates_csv(aggregates, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("mu,channel,mean_fidelity,std_fidelity,trials\n")
            for a in aggregates:
                fh.write(
                    f"{a.mu!r},{a.channel},{a.mean_fidelity!r},{a.std_fidelity!r},{a.trials}\n"
                )
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def import_results(path) -> SweepResult:
    """Read back a JSON export."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read results file {path}: {exc}") from exc
    try:
        rows = tuple(
            SweepRow(float(r["mu"]), str(r["channel"]), int(r["trial"]),
                     float(r["fidelity"]), bool(r["refined"]))
            for r in obj["rows"]
        )
        aggregates = tuple(
            SweepAggregate(float(a["mu"]), str(a["channel"]), float(a["mean_fidelity"]),
                           float(a["std_fidelity"]), int(a["trials"]))
            for a in obj["aggregates"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed results file {path}: {exc}") from exc
    return SweepResult(rows, aggregates)
