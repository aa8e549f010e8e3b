"""Von Neumann pointer model: reading densities, interval probabilities,
momentum densities, strong/weak limits, and mixed-state variants.

The pointer starts in a Gaussian of width ``delta_f`` normalized so that
the *squared* profile integrates to 1, prefactor (pi delta_f^2)^(-1/4).
Interval overlaps use the closed-form error-function expressions; grid
quadrature (trapezoid) is used only for full densities.

Sign conventions: momentum space uses <f|lam> = exp(i lam f)/sqrt(2 pi),
which makes the weak-limit mean momentum of a projector measurement
+Im[alpha_n]/delta_f^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .kernels import density_from_gram, momentum_intensity
from .paths import PathAmplitudeSet, PostselectionError, two_step_amplitudes
from .qcore import MixedState, Observable, QuantumState, Unitary

DENSITY_NORM_TOL = 1e-8
DEFAULT_GRID_POINTS = 4096
GRID_MARGIN_WIDTHS = 6.0


@dataclass(frozen=True, eq=False)
class PointerConfig:
    """Gaussian width, coupled eigenvalues, and the density evaluation grid."""

    delta_f: float
    eigenvalues: np.ndarray
    grid: tuple[float, float, int]

    def __init__(self, delta_f: float, eigenvalues, grid: tuple[float, float, int] | None = None):
        if delta_f <= 0:
            raise ValueError(f"delta_f must be positive, got {delta_f}")
        eig = np.asarray(eigenvalues, dtype=np.float64).copy()
        if eig.ndim != 1 or eig.shape[0] < 1:
            raise ValueError("eigenvalues must be a non-empty 1-d array")
        lo_req = eig.min() - GRID_MARGIN_WIDTHS * delta_f
        hi_req = eig.max() + GRID_MARGIN_WIDTHS * delta_f
        if grid is None:
            # keep at least ~8 grid points per Gaussian width
            needed = int(np.ceil((hi_req - lo_req) / (delta_f / 8.0)))
            n_default = int(min(max(DEFAULT_GRID_POINTS, needed), 1 << 20))
            grid = (float(lo_req), float(hi_req), n_default)
        f_min, f_max, n_points = float(grid[0]), float(grid[1]), int(grid[2])
        if n_points < 512:
            raise ValueError(f"grid needs at least 512 points, got {n_points}")
        if f_min > lo_req + 1e-12 or f_max < hi_req - 1e-12:
            raise ValueError(
                f"grid [{f_min}, {f_max}] must cover [{lo_req}, {hi_req}] "
                f"(eigenvalue range +/- {GRID_MARGIN_WIDTHS} delta_f)"
            )
        eig.setflags(write=False)
        object.__setattr__(self, "delta_f", float(delta_f))
        object.__setattr__(self, "eigenvalues", eig)
        object.__setattr__(self, "grid", (f_min, f_max, n_points))

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def grid_points(self) -> np.ndarray:
        f_min, f_max, n = self.grid
        return np.linspace(f_min, f_max, n)

    def with_delta_f(self, delta_f: float, grid=None) -> "PointerConfig":
        return PointerConfig(delta_f, self.eigenvalues, grid)


@dataclass(frozen=True, eq=False)
class ReadingDensity:
    """Probability density tabulated on a uniform grid, with a CDF for sampling."""

    f: np.ndarray
    values: np.ndarray
    cdf: np.ndarray

    def __init__(self, f, values):
        f = np.asarray(f, dtype=np.float64).copy()
        values = np.asarray(values, dtype=np.float64).copy()
        if f.shape != values.shape or f.ndim != 1:
            raise ValueError("grid and values must be matching 1-d arrays")
        floor = -1e-12 * max(float(values.max()), 1.0)
        if values.min() < floor:
            raise ValueError(f"density has negative values down to {values.min()}")
        np.clip(values, 0.0, None, out=values)
        total = np.trapezoid(values, f)
        if abs(total - 1.0) > DENSITY_NORM_TOL:
            raise ValueError(f"density integrates to {total}, expected 1")
        # exact renormalization keeps the CDF endpoint at exactly 1
        values /= total
        seg = 0.5 * (values[1:] + values[:-1]) * np.diff(f)
        cdf = np.concatenate(([0.0], np.cumsum(seg)))
        cdf[-1] = 1.0
        f.setflags(write=False)
        values.setflags(write=False)
        cdf.setflags(write=False)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "cdf", cdf)

    def mean(self) -> float:
        return float(np.trapezoid(self.f * self.values, self.f))


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """X_jj' = Re[A~*_j' A~_j]: the unknowns of the inverse linear system."""

    x: np.ndarray

    def __init__(self, x):
        x = np.asarray(x, dtype=np.float64).copy()
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {x.shape}")
        if np.max(np.abs(x - x.T)) > 1e-12:
            raise ValueError("Gram matrix must be symmetric")
        diag = np.diag(x)
        if diag.min() < -1e-12:
            raise ValueError(f"negative diagonal entry {diag.min()}")
        bound = np.sqrt(np.outer(np.maximum(diag, 0.0), np.maximum(diag, 0.0)))
        if np.max(np.abs(x) - bound) > 1e-12:
            raise ValueError("Cauchy-Schwarz violated beyond tolerance")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def dim(self) -> int:
        return self.x.shape[0]

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray) -> "GramMatrix":
        a = np.asarray(amplitudes, dtype=np.complex128)
        return cls(np.real(np.outer(a, a.conj())))


def gaussian(config: PointerConfig, f, j: int) -> np.ndarray | float:
    """G(f - C_j) with the square-normalized prefactor (pi delta_f^2)^(-1/4)."""
    df = config.delta_f
    return (np.pi * df**2) ** -0.25 * np.exp(
        -((np.asarray(f, dtype=np.float64) - config.eigenvalues[j]) ** 2) / (2.0 * df**2)
    )


def overlap_integrals(config: PointerConfig, interval: tuple[float, float]) -> np.ndarray:
    """I_jj' = int_a^b G_j G_j' df in closed form; (a, b) may be infinite."""
    a, b = interval
    if not a < b:
        raise ValueError(f"interval must satisfy a < b, got ({a}, {b})")
    c = config.eigenvalues
    df = config.delta_f
    mid = 0.5 * (c[:, None] + c[None, :])
    damp = np.exp(-((c[:, None] - c[None, :]) ** 2) / (4.0 * df**2))
    hi = erf((b - mid) / df) if np.isfinite(b) else np.ones_like(mid)
    lo = erf((a - mid) / df) if np.isfinite(a) else -np.ones_like(mid)
    return damp * 0.5 * (hi - lo)


FULL_LINE = (-np.inf, np.inf)


def arrival_probability(amps: PathAmplitudeSet, config: PointerConfig) -> float:
    """N^2: probability the post-selection succeeds, readings ignored."""
    a = amps.amplitudes
    return float(np.real(a.conj() @ overlap_integrals(config, FULL_LINE) @ a))


def normalized_amplitudes(amps: PathAmplitudeSet, config: PointerConfig) -> np.ndarray:
    """A~_j = A_j / N; errors out when post-selection is impossible."""
    n2 = arrival_probability(amps, config)
    if n2 <= 0.0 or not np.any(amps.amplitudes):
        raise PostselectionError(
            f"post-selection impossible: arrival probability {n2}", denominator=n2
        )
    return amps.amplitudes / np.sqrt(n2)


def reading_density(amps: PathAmplitudeSet, config: PointerConfig) -> ReadingDensity:
    """Conditional pointer-reading density for a pre/post-selected chain."""
    a_tilde = normalized_amplitudes(amps, config)
    gram = np.real(np.outer(a_tilde, a_tilde.conj()))
    f = config.grid_points()
    values = density_from_gram(f, config.eigenvalues, config.delta_f, gram)
    return ReadingDensity(f, values)


def density_from_gram_matrix(gram: GramMatrix, config: PointerConfig) -> ReadingDensity:
    """Density built directly from a (possibly reconstructed) Gram matrix.

    The Gram matrix is renormalized for this config's delta_f, so a matrix
    recovered at one resolution predicts densities at any other.
    """
    x = gram.x
    norm = float(np.sum(x * overlap_integrals(config, FULL_LINE)))
    if norm <= 0.0:
        raise PostselectionError("Gram matrix has zero arrival probability", denominator=norm)
    f = config.grid_points()
    values = density_from_gram(f, config.eigenvalues, config.delta_f, x / norm)
    return ReadingDensity(f, values)


def interval_probability(
    amps: PathAmplitudeSet,
    config: PointerConfig,
    interval: tuple[float, float],
    conditional: bool = True,
) -> float:
    """Probability of a reading inside the interval (and arrival, if unconditional).

    ``conditional=False`` returns the unnormalized quadratic form, whose
    full-line value is the arrival probability N^2.
    """
    a = amps.amplitudes
    p = float(np.real(a.conj() @ overlap_integrals(config, interval) @ a))
    if conditional:
        p /= arrival_probability(amps, config)
    return p


def arrival_probability_curve(
    amps: PathAmplitudeSet, eigenvalues, delta_fs
) -> np.ndarray:
    """N^2 as a function of delta_f.

    Interpolates between |sum_j A_j|^2 (delta_f -> inf, system unperturbed)
    and sum_j |A_j|^2 (delta_f -> 0, interference destroyed).
    """
    eig = np.asarray(eigenvalues, dtype=np.float64)
    a = amps.amplitudes
    cross = np.outer(a, a.conj())
    gaps2 = (eig[:, None] - eig[None, :]) ** 2
    out = np.empty(len(delta_fs))
    for i, df in enumerate(delta_fs):
        out[i] = float(np.real(np.sum(cross * np.exp(-gaps2 / (4.0 * df**2)))))
    return out


def exact_mean_reading(amps: PathAmplitudeSet, config: PointerConfig) -> float:
    """<f> of the conditional reading density, in closed form."""
    a_tilde = normalized_amplitudes(amps, config)
    gram = np.real(np.outer(a_tilde, a_tilde.conj()))
    c = config.eigenvalues
    mid = 0.5 * (c[:, None] + c[None, :])
    return float(np.sum(gram * mid * overlap_integrals(config, FULL_LINE)))


def strong_limit_stats(amps: PathAmplitudeSet, eigenvalues) -> tuple[np.ndarray, float]:
    """delta_f -> 0 limit: point masses |A_j|^2 / sum and the resulting mean."""
    eig = np.asarray(eigenvalues, dtype=np.float64)
    w = np.abs(amps.amplitudes) ** 2
    total = w.sum()
    if total <= 0.0:
        raise PostselectionError("all amplitudes vanish", denominator=0.0)
    masses = w / total
    return masses, float(np.dot(eig, masses))


def projector_strong_mean(amps: PathAmplitudeSet, n: int) -> float:
    """Strong-limit mean for the projector |c_n><c_n|.

    The (N-1)-fold degenerate zero eigenvalue makes the complement
    amplitudes add coherently in the denominator.
    """
    a = amps.amplitudes
    target = abs(a[n]) ** 2
    rest = abs(np.sum(np.delete(a, n))) ** 2
    denom = target + rest
    if denom <= 0.0:
        raise PostselectionError("all amplitudes vanish", denominator=0.0)
    return target / denom


@dataclass(frozen=True, eq=False)
class WeakStats:
    """Weak-limit (delta_f -> inf) pointer statistics."""

    alpha: np.ndarray                 # relative amplitudes A_j / sum A
    mean_reading: float               # Re[sum C_j alpha_j]
    projector_mean_readings: np.ndarray   # Re[alpha_n] per projector |c_n><c_n|
    projector_mean_momenta: np.ndarray    # +Im[alpha_n] / delta_f^2


def weak_limit_stats(amps: PathAmplitudeSet, config: PointerConfig) -> WeakStats:
    a = amps.amplitudes
    total = np.sum(a)
    if abs(total) <= 1e-12 * max(np.sum(np.abs(a)), 1e-300):
        raise PostselectionError(
            f"amplitude sum {total} vanishes; weak value undefined", denominator=abs(total)
        )
    alpha = a / total
    mean = float(np.real(np.dot(config.eigenvalues, alpha)))
    return WeakStats(
        alpha=alpha,
        mean_reading=mean,
        projector_mean_readings=np.real(alpha),
        projector_mean_momenta=np.imag(alpha) / config.delta_f**2,
    )


def momentum_density(amps: PathAmplitudeSet, config: PointerConfig) -> ReadingDensity:
    """Density of the pointer momentum lam acquired during the interaction."""
    a_tilde = normalized_amplitudes(amps, config)
    span = 8.0 / config.delta_f
    lam = np.linspace(-span, span, config.grid[2])
    values = momentum_intensity(
        lam, config.eigenvalues, config.delta_f,
        np.ascontiguousarray(np.real(a_tilde)), np.ascontiguousarray(np.imag(a_tilde)),
    )
    total = np.trapezoid(values, lam)
    return ReadingDensity(lam, values / total)


def unconditional_density(one_step_amps: PathAmplitudeSet, config: PointerConfig) -> ReadingDensity:
    """No-post-selection density: sum_j G_j^2 |A(c_j <- b)|^2, no cross terms."""
    w = np.abs(one_step_amps.amplitudes) ** 2
    total = w.sum()
    if total <= 0.0:
        raise PostselectionError("all amplitudes vanish", denominator=0.0)
    f = config.grid_points()
    values = density_from_gram(f, config.eigenvalues, config.delta_f, np.diag(w / total))
    return ReadingDensity(f, values)


def unconditional_mean(one_step_amps: PathAmplitudeSet, config: PointerConfig) -> float:
    """<f> = <psi(t')| C |psi(t')>, independent of the accuracy delta_f."""
    w = np.abs(one_step_amps.amplitudes) ** 2
    return float(np.dot(config.eigenvalues, w) / w.sum())


def post_measurement_state(
    state: QuantumState, config: PointerConfig, reading: float
) -> QuantumState:
    """System state after a reading f, components in the measured eigenbasis.

    ``state`` must be expressed in the eigenbasis the pointer couples to.
    """
    if state.dim != config.dim:
        raise ValueError(f"state dim {state.dim} != config dim {config.dim}")
    weights = np.array([gaussian(config, reading, j) for j in range(config.dim)])
    coeffs = weights * state.coefficients
    norm = np.linalg.norm(coeffs)
    if norm <= 1e-300:
        raise PostselectionError(
            f"reading {reading} has zero amplitude from this state", denominator=float(norm)
        )
    return QuantumState(coeffs)


@dataclass(frozen=True, eq=False)
class MixedPointerStats:
    """Mixture reading density with its strong- and weak-limit means."""

    density: ReadingDensity
    strong_mean: float
    weak_mean: float
    component_arrivals: np.ndarray


def mixed_reading_density(
    mixed: MixedState,
    first_leg: Unitary,
    middle: Observable,
    second_leg: Unitary,
    final: QuantumState,
    config: PointerConfig,
) -> MixedPointerStats:
    """Pointer statistics for a mixed preparation.

    Each component's conditional density is weighted by w(alpha) times its
    arrival probability N^2_alpha; only then does the mixture density
    integrate to 1 and reduce to the pure case for a single component.
    """
    comps = mixed.components
    amp_sets = [
        two_step_amplitudes(state, first_leg, middle, second_leg, final)
        for _, state in comps
    ]
    arrivals = np.array([arrival_probability(a, config) for a in amp_sets])
    weights = np.array([w for w, _ in comps])
    eff = weights * arrivals
    if eff.sum() <= 0.0:
        raise PostselectionError(
            "post-selection unreachable from every mixture component", denominator=float(eff.sum())
        )
    f = config.grid_points()
    if len(comps) == 1:
        # bit-identical to the pure pipeline for a trivial mixture
        density = reading_density(amp_sets[0], config)
    else:
        mix_values = np.zeros_like(f)
        for w_eff, amps in zip(eff, amp_sets):
            if w_eff > 0.0:
                mix_values += w_eff * reading_density(amps, config).values
        mix_values /= eff.sum()
        density = ReadingDensity(f, mix_values)

    # strong limit: incoherent path weights, averaged over the mixture
    path_w = np.array([np.abs(a.amplitudes) ** 2 for a in amp_sets])
    strong_num = float(np.dot(weights @ path_w, config.eigenvalues))
    strong_den = float(np.sum(weights @ path_w))
    strong_mean = strong_num / strong_den

    # weak limit: amplitude sums weight the cross terms
    totals = np.array([np.sum(a.amplitudes) for a in amp_sets])
    weak_num = 0.0
    for w, amps, tot in zip(weights, amp_sets, totals):
        weak_num += w * float(np.real(np.conj(tot) * np.dot(config.eigenvalues, amps.amplitudes)))
    weak_den = float(np.dot(weights, np.abs(totals) ** 2))
    weak_mean = weak_num / weak_den

    return MixedPointerStats(
        density=density,
        strong_mean=strong_mean,
        weak_mean=weak_mean,
        component_arrivals=arrivals,
    )
