"""The inverse problem: recover path-amplitude moduli and relative phases
from pointer statistics, predict commuting-observable densities, and
reconstruct the initial state.

Unknowns are the N(N+1)/2 entries of the Gram matrix X_jj' = Re[A~*_j' A~_j],
ordered diagonal-first, then off-diagonal pairs (j, j') with j < j' in
lexicographic order.  Position statistics determine the amplitudes only up
to complex conjugation (all phases flipped); results carry both branches.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .pointer import (
    FULL_LINE,
    GramMatrix,
    PointerConfig,
    ReadingDensity,
    arrival_probability,
    density_from_gram_matrix,
    interval_probability,
    normalized_amplitudes,
    overlap_integrals,
    reading_density,
)
from .paths import PathAmplitudeSet
from .qcore import Observable, QuantumState
from .qcore import _degeneracy_classes
from .sampler import IntervalPartition, count, frequencies, sample

RANK_ATOL = 1e-6
RANK_RTOL = 1e-10


class RankDeficientError(RuntimeError):
    """Design matrix is numerically singular (strong or weak limit)."""

    def __init__(self, message: str, sigma_min: float):
        super().__init__(message)
        self.sigma_min = sigma_min


class NonCommutingError(ValueError):
    """Prediction requested for an observable outside the shared eigenbasis."""


def pair_order(n: int) -> list[tuple[int, int]]:
    """Off-diagonal column order: (j, j') with j < j', lexicographic."""
    return [(j, jp) for j in range(n) for jp in range(j + 1, n)]


def unknown_count(n: int) -> int:
    return n * (n + 1) // 2


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Rows: probe points or interval cells; columns: Gram unknowns."""

    matrix: np.ndarray
    dim: int

    def __init__(self, matrix, dim: int):
        mat = np.asarray(matrix, dtype=np.float64).copy()
        if not np.all(np.isfinite(mat)):
            raise ValueError("design matrix has non-finite entries")
        if mat.shape[1] != unknown_count(dim):
            raise ValueError(
                f"expected {unknown_count(dim)} columns for dim {dim}, got {mat.shape[1]}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "dim", int(dim))

    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    def abs_determinant(self) -> float:
        """Product of the leading P singular values (|det| for square designs)."""
        s = self.singular_values()
        return float(np.prod(s[: self.matrix.shape[1]]))


def default_probe_points(config: PointerConfig, m: int | None = None) -> np.ndarray:
    """m probes equally spaced across [min C - delta_f, max C + delta_f]."""
    if m is None:
        m = unknown_count(config.dim)
    c = config.eigenvalues
    return np.linspace(c.min() - config.delta_f, c.max() + config.delta_f, m)


def pointwise_design(probes, config: PointerConfig) -> DesignMatrix:
    probes = np.asarray(probes, dtype=np.float64)
    if len(np.unique(probes)) != probes.shape[0]:
        raise ValueError("probe points must be pairwise distinct")
    n = config.dim
    df = config.delta_f
    g = (np.pi * df**2) ** -0.25 * np.exp(
        -((probes[:, None] - config.eigenvalues[None, :]) ** 2) / (2.0 * df**2)
    )
    cols = [g[:, j] ** 2 for j in range(n)]
    cols += [2.0 * g[:, j] * g[:, jp] for j, jp in pair_order(n)]
    return DesignMatrix(np.column_stack(cols), n)


def interval_design(partition: IntervalPartition, config: PointerConfig) -> DesignMatrix:
    """Row per cell: the J coefficients (Gaussian overlaps over the cell)."""
    n = config.dim
    rows = []
    for nu in range(partition.n_cells):
        i_mat = overlap_integrals(config, partition.cell_bounds(nu))
        rows.append(
            [i_mat[j, j] for j in range(n)]
            + [2.0 * i_mat[j, jp] for j, jp in pair_order(n)]
        )
    return DesignMatrix(np.array(rows), n)


def one_step_design(probes, config: PointerConfig) -> DesignMatrix:
    """Design for an unconditional one-step density: no cross terms exist.

    Every off-diagonal column is structurally zero, so the phase
    information is unrecoverable from a two-measurement history.
    """
    full = pointwise_design(probes, config).matrix.copy()
    full[:, config.dim:] = 0.0
    return DesignMatrix(full, config.dim)


def gram_from_vector(x: np.ndarray, n: int) -> np.ndarray:
    mat = np.zeros((n, n))
    mat[np.diag_indices(n)] = x[:n]
    for idx, (j, jp) in enumerate(pair_order(n)):
        mat[j, jp] = mat[jp, j] = x[n + idx]
    return mat


def vector_from_gram(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    return np.concatenate([np.diag(mat), [mat[j, jp] for j, jp in pair_order(n)]])


def _project_feasible(mat: np.ndarray) -> tuple[np.ndarray, float]:
    """Clamp onto the Cauchy-Schwarz-feasible set; returns the adjustment size."""
    out = mat.copy()
    adjustment = 0.0
    diag = np.diag(out).copy()
    neg = diag < 0
    if np.any(neg):
        warnings.warn(
            f"clamping {int(neg.sum())} negative diagonal Gram entries to 0 "
            "(statistical noise)",
            stacklevel=3,
        )
        adjustment += float(np.abs(diag[neg]).sum())
        diag[neg] = 0.0
        out[np.diag_indices_from(out)] = diag
    bound = np.sqrt(np.outer(diag, diag))
    over = np.abs(out) > bound
    np.fill_diagonal(over, False)
    if np.any(over):
        adjustment += float(np.max(np.abs(out[over]) - bound[over]))
        out = np.clip(out, -bound, bound)
        out[np.diag_indices_from(out)] = diag
    return out, adjustment


@dataclass(frozen=True, eq=False)
class InversionDiagnostics:
    abs_determinant: float
    sigma_min: float
    residual: float
    adjustment: float


def _check_rank(design: DesignMatrix) -> np.ndarray:
    s = design.singular_values()
    p = design.matrix.shape[1]
    if design.matrix.shape[0] < p:
        raise RankDeficientError(
            f"only {design.matrix.shape[0]} rows for {p} unknowns", sigma_min=float(s[-1])
        )
    sigma_min, sigma_max = float(s[p - 1]), float(s[0])
    if sigma_min < max(RANK_ATOL, RANK_RTOL * sigma_max):
        raise RankDeficientError(
            f"design matrix numerically singular: smallest singular value "
            f"{sigma_min:.3e} (largest {sigma_max:.3e})",
            sigma_min=sigma_min,
        )
    return s


def _solve(design: DesignMatrix, rhs: np.ndarray) -> tuple[GramMatrix, InversionDiagnostics]:
    s = _check_rank(design)
    p = design.matrix.shape[1]
    x, _, _, _ = np.linalg.lstsq(design.matrix, rhs, rcond=None)
    residual = float(np.linalg.norm(design.matrix @ x - rhs))
    mat, adjustment = _project_feasible(gram_from_vector(x, design.dim))
    return (
        GramMatrix(mat),
        InversionDiagnostics(
            abs_determinant=float(np.prod(s[:p])),
            sigma_min=float(s[p - 1]),
            residual=residual,
            adjustment=adjustment,
        ),
    )


def solve_pointwise(
    rho_values, probes, config: PointerConfig
) -> tuple[GramMatrix, InversionDiagnostics]:
    """Solve the pointwise linear system rho(f_mu) -> X."""
    rho_values = np.asarray(rho_values, dtype=np.float64)
    design = pointwise_design(probes, config)
    if rho_values.shape[0] != design.matrix.shape[0]:
        raise ValueError("one density value per probe point required")
    return _solve(design, rho_values)


def solve_intervals(
    w, partition: IntervalPartition, config: PointerConfig
) -> tuple[GramMatrix, InversionDiagnostics]:
    """Least-squares solve of the interval system J x = W."""
    w = np.asarray(w, dtype=np.float64)
    design = interval_design(partition, config)
    if w.shape[0] != design.matrix.shape[0]:
        raise ValueError("one frequency per partition cell required")
    return _solve(design, w)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Recovered moduli and phases, with conditioning diagnostics.

    ``phases`` uses the acos branch in [0, pi] with sign resolution for
    N >= 3; the conjugate branch (all phases negated) is equally consistent
    with position statistics.
    """

    moduli: np.ndarray
    phases: np.ndarray
    gram: GramMatrix
    abs_determinant: float
    sigma_min: float
    residual: float
    adjustment: float = 0.0
    se_moduli: np.ndarray | None = field(default=None)
    se_phases: np.ndarray | None = field(default=None)

    def amplitudes(self, branch: int = 0) -> np.ndarray:
        """Complex amplitudes for the requested conjugation branch (0 or 1)."""
        sign = 1.0 if branch == 0 else -1.0
        return self.moduli * np.exp(1j * sign * self.phases)

    def phase_branches(self) -> tuple[np.ndarray, np.ndarray]:
        return self.phases, -self.phases

    def to_json(self) -> str:
        payload = {
            "moduli": self.moduli.tolist(),
            "phases": self.phases.tolist(),
            "gram": self.gram.x.tolist(),
            "column_order": "diagonal X_jj for j=0..N-1, then X_jj' for pairs "
                            "(j, j') with j < j' in lexicographic order",
            "abs_determinant": self.abs_determinant,
            "sigma_min": self.sigma_min,
            "residual": self.residual,
            "adjustment": self.adjustment,
            "se_moduli": None if self.se_moduli is None else self.se_moduli.tolist(),
            "se_phases": None if self.se_phases is None else self.se_phases.tolist(),
            "conjugation_note": "phases determined up to a global sign flip",
        }
        return json.dumps(payload, indent=2)


def amplitudes_from_gram(
    gram: GramMatrix,
    diagnostics: InversionDiagnostics | None = None,
    ref: int = 0,
) -> ReconstructionResult:
    """Extract |A~_j| and phases from X; phi_ref = 0 by convention.

    For N >= 3 the off-row entries X_jj' (j, j' != ref) fix the relative
    phase signs up to one global conjugation; their misfit enters the
    reported residual.
    """
    x = gram.x
    n = gram.dim
    diag = np.diag(x)
    if diag[ref] <= 1e-14 * max(float(diag.max()), 1e-300):
        best = int(np.argmax(diag))
        raise ValueError(
            f"reference amplitude {ref} vanishes (X[{ref},{ref}]={diag[ref]}); "
            f"re-reference to the largest diagonal entry, index {best}"
        )
    moduli = np.sqrt(np.maximum(diag, 0.0))
    phases = np.zeros(n)
    for j in range(n):
        if j == ref or moduli[j] == 0.0:
            continue
        ratio = np.clip(x[j, ref] / (moduli[j] * moduli[ref]), -1.0, 1.0)
        phases[j] = float(np.arccos(ratio))

    # resolve signs of phases against the off-reference rows (N >= 3)
    others = [j for j in range(n) if j != ref and moduli[j] > 0.0 and phases[j] > 0.0]
    signs = {j: 1.0 for j in range(n)}
    for pos, j in enumerate(others):
        if pos == 0:
            continue  # first free phase fixes the global conjugation branch
        scores = []
        for s in (1.0, -1.0):
            misfit = 0.0
            for jp in others[:pos]:
                model = moduli[j] * moduli[jp] * np.cos(s * phases[j] - signs[jp] * phases[jp])
                misfit += (x[j, jp] - model) ** 2
            scores.append(misfit)
        signs[j] = 1.0 if scores[0] <= scores[1] else -1.0
    for j in others:
        phases[j] *= signs[j]

    rebuilt = np.real(
        np.outer(moduli * np.exp(1j * phases), (moduli * np.exp(1j * phases)).conj())
    )
    cross_misfit = float(np.linalg.norm(x - rebuilt))
    base_residual = diagnostics.residual if diagnostics is not None else 0.0
    return ReconstructionResult(
        moduli=moduli,
        phases=phases,
        gram=gram,
        abs_determinant=diagnostics.abs_determinant if diagnostics is not None else float("nan"),
        sigma_min=diagnostics.sigma_min if diagnostics is not None else float("nan"),
        residual=float(np.hypot(base_residual, cross_misfit)),
        adjustment=diagnostics.adjustment if diagnostics is not None else 0.0,
    )


def frequency_covariance(w: np.ndarray, k: int) -> np.ndarray:
    """Multinomial covariance of observed frequencies after K trials."""
    w = np.asarray(w, dtype=np.float64)
    return (np.diag(w) - np.outer(w, w)) / k


def reconstruction_standard_errors(
    design: DesignMatrix,
    gram: GramMatrix,
    w: np.ndarray,
    k: int,
    ref: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """First-order standard errors of moduli and phases from multinomial noise."""
    n = design.dim
    pinv = np.linalg.pinv(design.matrix)
    cov_x = pinv @ frequency_covariance(w, k) @ pinv.T
    x = gram.x
    diag = np.maximum(np.diag(x), 1e-300)
    moduli = np.sqrt(diag)
    pairs = pair_order(n)

    def col(j: int, jp: int) -> int:
        if j == jp:
            return j
        lo, hi = min(j, jp), max(j, jp)
        return n + pairs.index((lo, hi))

    se_moduli = np.empty(n)
    for j in range(n):
        grad = np.zeros(unknown_count(n))
        grad[j] = 0.5 / moduli[j]
        se_moduli[j] = np.sqrt(max(grad @ cov_x @ grad, 0.0))

    se_phases = np.zeros(n)
    for j in range(n):
        if j == ref:
            continue
        r = np.clip(x[j, ref] / (moduli[j] * moduli[ref]), -1.0, 1.0)
        denom = np.sqrt(max(1.0 - r * r, 1e-12))
        grad = np.zeros(unknown_count(n))
        grad[col(j, ref)] = -1.0 / (moduli[j] * moduli[ref]) / denom
        grad[j] = r / (2.0 * diag[j]) / denom
        grad[ref] = r / (2.0 * diag[ref]) / denom
        se_phases[j] = np.sqrt(max(grad @ cov_x @ grad, 0.0))
    return se_moduli, se_phases


def reconstruct_from_frequencies(
    w,
    partition: IntervalPartition,
    config: PointerConfig,
    k: int | None = None,
    ref: int = 0,
) -> ReconstructionResult:
    """Interval-frequency pipeline: solve, project, extract, attach errors."""
    w = np.asarray(w, dtype=np.float64)
    gram, diag = solve_intervals(w, partition, config)
    result = amplitudes_from_gram(gram, diag, ref=ref)
    if k is not None:
        se_m, se_p = reconstruction_standard_errors(
            interval_design(partition, config), gram, w, k, ref=ref
        )
        result = ReconstructionResult(
            moduli=result.moduli,
            phases=result.phases,
            gram=result.gram,
            abs_determinant=result.abs_determinant,
            sigma_min=result.sigma_min,
            residual=result.residual,
            adjustment=result.adjustment,
            se_moduli=se_m,
            se_phases=se_p,
        )
    return result


def predict_commuting(
    gram: GramMatrix,
    new_eigenvalues,
    new_delta_f: float,
    grid: tuple[float, float, int] | None = None,
    degeneracy_tolerance: float | None = None,
) -> ReadingDensity:
    """Predicted reading density for a commuting observable at a new resolution.

    ``new_eigenvalues`` assigns one eigenvalue per original eigenvector
    (a commuting observable shares the eigenbasis).  Degenerate classes are
    merged coherently before the density is built.
    """
    new_eig = np.asarray(new_eigenvalues, dtype=np.float64)
    if new_eig.shape[0] != gram.dim:
        raise ValueError("one eigenvalue per original eigenvector required")
    if degeneracy_tolerance is None:
        scale = float(np.max(np.abs(new_eig))) if np.any(new_eig) else 1.0
        degeneracy_tolerance = 1e-9 * scale
    classes = _degeneracy_classes(new_eig, degeneracy_tolerance)
    k = len(classes)
    merged = np.empty((k, k))
    for a, cls_a in enumerate(classes):
        for b, cls_b in enumerate(classes):
            merged[a, b] = gram.x[np.ix_(cls_a, cls_b)].sum()
    merged, _ = _project_feasible(0.5 * (merged + merged.T))
    class_eig = np.array([new_eig[list(cls)].mean() for cls in classes])
    config = PointerConfig(new_delta_f, class_eig, grid)
    return density_from_gram_matrix(GramMatrix(merged), config)


def predict_commuting_observable(
    gram: GramMatrix,
    original: Observable,
    new: Observable,
    new_delta_f: float,
    grid: tuple[float, float, int] | None = None,
    tol: float = 1e-10,
) -> ReadingDensity:
    """As predict_commuting, mapping the new observable's eigenvalues onto the
    original eigenbasis; rejects observables with a different eigenbasis."""
    overlap = np.abs(new.eigenvectors.conj().T @ original.eigenvectors)
    mapped = np.empty(original.dim)
    for j in range(original.dim):
        hits = np.where(overlap[:, j] > 1.0 - tol)[0]
        if hits.shape[0] != 1:
            raise NonCommutingError(
                "observable does not share the measured eigenbasis; its statistics "
                "involve unknown cross-amplitude terms <d|U|c_j'><c_j|U|b> (j != j') "
                "that position data cannot supply"
            )
        mapped[j] = new.eigenvalues[hits[0]]
    return predict_commuting(gram, mapped, new_delta_f, grid)


@dataclass(frozen=True, eq=False)
class WeakEstimate:
    """Per-projector relative amplitudes recovered from weak-limit statistics."""

    re_alpha: np.ndarray
    im_alpha: np.ndarray
    se_re: np.ndarray
    se_im: np.ndarray
    consistent: bool
    sum_deviation: float
    cost_note: str = "trial count must grow as delta_f^2 for fixed accuracy"


def weak_reconstruct(
    mean_readings,
    mean_momenta,
    config: PointerConfig,
    se_readings=None,
    se_momenta=None,
    min_width_ratio: float = 10.0,
) -> WeakEstimate:
    """Invert the weak-limit formulas: Re a_n = <f>_n, Im a_n = <lam>_n df^2."""
    span = float(np.ptp(config.eigenvalues))
    if span > 0 and config.delta_f < min_width_ratio * span:
        raise ValueError(
            f"delta_f={config.delta_f} is below the weak regime "
            f"({min_width_ratio} x eigenvalue span {span})"
        )
    mean_readings = np.asarray(mean_readings, dtype=np.float64)
    mean_momenta = np.asarray(mean_momenta, dtype=np.float64)
    df2 = config.delta_f**2
    re_alpha = mean_readings.copy()
    im_alpha = mean_momenta * df2
    se_re = (
        np.zeros_like(re_alpha) if se_readings is None
        else np.asarray(se_readings, dtype=np.float64)
    )
    se_im = (
        np.zeros_like(im_alpha) if se_momenta is None
        else np.asarray(se_momenta, dtype=np.float64) * df2
    )
    total = np.sum(re_alpha) + 1j * np.sum(im_alpha)
    deviation = abs(total - 1.0)
    combined = float(np.sqrt(np.sum(se_re**2) + np.sum(se_im**2)))
    consistent = deviation <= 4.0 * max(combined, 1e-9)
    return WeakEstimate(
        re_alpha=re_alpha,
        im_alpha=im_alpha,
        se_re=se_re,
        se_im=se_im,
        consistent=bool(consistent),
        sum_deviation=float(deviation),
    )


def reconstruct_initial_state(
    amplitudes,
    d_at_tprime: QuantumState,
    threshold: float = 1e-10,
) -> QuantumState:
    """Recover |b(t')> in the measured basis from A~_j and the known |d(t')>.

    <c_j|b(t')> is proportional to A~_j / <d(t')|c_j>; the result is
    defined up to global phase and inherits the conjugation ambiguity of
    the amplitudes (pass each branch and keep the better fidelity).
    """
    if isinstance(amplitudes, ReconstructionResult):
        amplitudes = amplitudes.amplitudes()
    amps = np.asarray(amplitudes, dtype=np.complex128)
    d = d_at_tprime.coefficients
    for j in range(amps.shape[0]):
        if abs(d[j]) < threshold:
            raise ValueError(
                f"division by the final-state component {j}: |<c_{j}|d(t')>| "
                f"= {abs(d[j]):.3e} below threshold"
            )
    return QuantumState(amps / d.conj())


@dataclass(frozen=True, eq=False)
class SweepRow:
    delta_f: float
    abs_determinant: float
    sigma_min: float
    recon_error: float
    arrival_prob: float


def _truth_parameters(
    amps: PathAmplitudeSet, config: PointerConfig, ref: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    a_tilde = normalized_amplitudes(amps, config)
    truth = amplitudes_from_gram(GramMatrix.from_amplitudes(a_tilde), ref=ref)
    return truth.moduli, truth.phases


def _parameter_error(result: ReconstructionResult, moduli, phases) -> float:
    best = np.inf
    for branch in result.phase_branches():
        err = np.linalg.norm(result.moduli - moduli) ** 2
        diff = np.angle(np.exp(1j * (branch - phases)))
        err += float(np.sum(diff**2))
        best = min(best, float(np.sqrt(err)))
    return best


def conditioning_sweep(
    amps: PathAmplitudeSet,
    eigenvalues,
    partition: IntervalPartition,
    delta_fs,
    k: int | None = None,
    seed: int = 0,
) -> list[SweepRow]:
    """Per-delta_f diagnostics: |det| and sigma_min of the interval design,
    reconstruction error (exact or sampled W), and arrival probability."""
    eig = np.asarray(eigenvalues, dtype=np.float64)
    rows = []
    for i, df in enumerate(delta_fs):
        config = PointerConfig(float(df), eig)
        design = interval_design(partition, config)
        s = design.singular_values()
        p = design.matrix.shape[1]
        abs_det = float(np.prod(s[:p]))
        sigma_min = float(s[min(p, s.shape[0]) - 1])
        arrival = arrival_probability(amps, config)
        try:
            if k is None:
                w = np.array([
                    interval_probability(amps, config, partition.cell_bounds(nu))
                    for nu in range(partition.n_cells)
                ])
            else:
                record = sample(reading_density(amps, config), k, seed + i)
                w = frequencies(count(record, partition))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                result = reconstruct_from_frequencies(w, partition, config, k=k)
            error = _parameter_error(result, *_truth_parameters(amps, config))
        except RankDeficientError:
            error = float("nan")
        rows.append(SweepRow(float(df), abs_det, sigma_min, error, arrival))
    return rows
