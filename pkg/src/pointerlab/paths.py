"""Path-amplitude engine for chains of sequential measurements.

A chain starts from a prepared state (the outcome of measurement 1) and
lists (observable, unitary) steps, the unitary propagating from the previous
measurement time to this one.  Amplitudes for a path of eigenstates are
products of transition amplitudes; probabilities follow the Born rule with
coherent summation inside intermediate degeneracy classes and incoherent
summation inside the final one (paths to distinguishable final outcomes do
not interfere).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .qcore import (
    DimensionMismatchError,
    Observable,
    QuantumState,
    Unitary,
)

COMPLETENESS_TOL = 1e-10


class PostselectionError(ValueError):
    """Post-selection has zero probability; conditional statistics undefined."""

    def __init__(self, message: str, denominator: float = 0.0):
        super().__init__(message)
        self.denominator = denominator


@dataclass(frozen=True, eq=False)
class MeasurementChain:
    """Prepared state plus ordered (Observable, Unitary) measurement steps."""

    preparation: QuantumState
    steps: tuple[tuple[Observable, Unitary], ...]

    def __init__(self, preparation: QuantumState, steps):
        steps = tuple((obs, u) for obs, u in steps)
        if len(steps) < 1:
            raise ValueError("a chain needs at least one measurement step")
        n = preparation.dim
        for obs, u in steps:
            if obs.dim != n or u.dim != n:
                raise DimensionMismatchError(
                    f"step dimensions ({obs.dim}, {u.dim}) do not match preparation dim {n}"
                )
        object.__setattr__(self, "preparation", preparation)
        object.__setattr__(self, "steps", steps)

    @property
    def dim(self) -> int:
        return self.preparation.dim

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def truncated(self) -> "MeasurementChain":
        """Chain with the last measurement dropped (needs >= 2 steps)."""
        if len(self.steps) < 2:
            raise ValueError("cannot truncate a single-step chain")
        return MeasurementChain(self.preparation, self.steps[:-1])


@dataclass(frozen=True, eq=False)
class PathAmplitudeTable:
    """All path amplitudes of a chain, keyed by eigenvector index tuples."""

    amplitudes: dict[tuple[int, ...], complex]

    def __init__(self, amplitudes: dict[tuple[int, ...], complex]):
        total = sum(abs(a) ** 2 for a in amplitudes.values())
        if abs(total - 1.0) > COMPLETENESS_TOL:
            raise ValueError(f"sum of |A|^2 is {total}, expected 1 (incomplete table?)")
        object.__setattr__(self, "amplitudes", dict(amplitudes))


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities of eigenvalue sequences, one class eigenvalue per step."""

    probabilities: dict[tuple[float, ...], float]

    def __init__(self, probabilities: dict[tuple[float, ...], float]):
        for key, p in probabilities.items():
            if p < -COMPLETENESS_TOL:
                raise ValueError(f"negative probability {p} for outcome {key}")
        total = sum(probabilities.values())
        if abs(total - 1.0) > COMPLETENESS_TOL:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        cleaned = {k: max(float(v), 0.0) for k, v in probabilities.items()}
        object.__setattr__(self, "probabilities", cleaned)

    def total(self) -> float:
        return sum(self.probabilities.values())


@dataclass(frozen=True, eq=False)
class PathAmplitudeSet:
    """The N amplitudes A(d <- c_j <- b) of one pre/post-selected two-step chain."""

    amplitudes: np.ndarray

    def __init__(self, amplitudes):
        arr = np.asarray(amplitudes, dtype=np.complex128).copy()
        if arr.ndim != 1:
            raise ValueError(f"expected a 1-d amplitude vector, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


def transition_amplitude(source: QuantumState, target: QuantumState, unitary: Unitary) -> complex:
    """<target| U |source>."""
    if source.dim != unitary.dim or target.dim != unitary.dim:
        raise DimensionMismatchError("transition amplitude dimensions do not match")
    return complex(np.vdot(target.coefficients, unitary.matrix @ source.coefficients))


def path_amplitude(chain: MeasurementChain, path: tuple[int, ...]) -> complex:
    """Product of the transition amplitudes along one eigenvector path."""
    if len(path) != chain.n_steps:
        raise ValueError(f"path length {len(path)} != number of steps {chain.n_steps}")
    amp = 1.0 + 0.0j
    prev = chain.preparation.coefficients
    for (obs, u), idx in zip(chain.steps, path):
        if not 0 <= idx < obs.dim:
            raise IndexError(f"eigenvector index {idx} out of range for dim {obs.dim}")
        vec = obs.eigenvectors[:, idx]
        amp *= np.vdot(vec, u.matrix @ prev)
        prev = vec
    return complex(amp)


def path_amplitude_table(chain: MeasurementChain) -> PathAmplitudeTable:
    n = chain.dim
    table = {
        path: path_amplitude(chain, path)
        for path in itertools.product(range(n), repeat=chain.n_steps)
    }
    return PathAmplitudeTable(table)


def outcome_distribution(chain: MeasurementChain) -> OutcomeDistribution:
    """Born-rule probabilities over degeneracy-class eigenvalue sequences.

    Amplitudes are summed coherently inside each intermediate class and the
    resulting probabilities added incoherently inside the final class.  A
    fully degenerate observable (one class) reduces to dropping that step's
    index, so the single-class case needs no special handling.
    """
    table = path_amplitude_table(chain).amplitudes
    observables = [obs for obs, _ in chain.steps]
    class_sets = [obs.degeneracy_classes for obs in observables]
    class_values = [obs.class_eigenvalues() for obs in observables]

    probs: dict[tuple[float, ...], float] = {}
    for combo in itertools.product(*(range(len(cs)) for cs in class_sets)):
        key = tuple(float(class_values[step][ci]) for step, ci in enumerate(combo))
        inter_classes = [class_sets[step][ci] for step, ci in enumerate(combo[:-1])]
        final_class = class_sets[-1][combo[-1]]
        p = 0.0
        for last in final_class:
            coherent = [
                table[inter + (last,)]
                for inter in itertools.product(*inter_classes)
            ]
            # pairwise summation bounds rounding error inside a class
            amp = complex(np.sum(np.array(coherent, dtype=np.complex128)))
            p += abs(amp) ** 2
        probs[key] = p
    return OutcomeDistribution(probs)


def marginalize_last(dist: OutcomeDistribution) -> OutcomeDistribution:
    """Sum the distribution over its last measurement's outcomes."""
    some_key = next(iter(dist.probabilities))
    if len(some_key) < 2:
        raise ValueError("need at least two steps to marginalize the last one")
    out: dict[tuple[float, ...], float] = {}
    for key, p in dist.probabilities.items():
        short = key[:-1]
        out[short] = out.get(short, 0.0) + p
    return OutcomeDistribution(out)


def postselected_distribution(chain: MeasurementChain, final_index: int) -> np.ndarray:
    """p[C_j] over middle outcomes, conditioned on the given final outcome.

    The chain must have exactly two steps and a nondegenerate middle
    observable.
    """
    if chain.n_steps != 2:
        raise ValueError("post-selection is defined for three-measurement chains")
    middle_obs = chain.steps[0][0]
    if len(middle_obs.degeneracy_classes) != middle_obs.dim:
        raise ValueError("middle observable must have distinct eigenvalues")
    n = chain.dim
    weights = np.array(
        [abs(path_amplitude(chain, (j, final_index))) ** 2 for j in range(n)]
    )
    denom = float(weights.sum())
    if denom <= 0.0:
        raise PostselectionError(
            f"post-selection impossible: total probability {denom}", denominator=denom
        )
    return weights / denom


def two_step_amplitudes(
    preparation: QuantumState,
    first_leg: Unitary,
    middle: Observable,
    second_leg: Unitary,
    final: QuantumState,
) -> PathAmplitudeSet:
    """A_j = <d| U2 |c_j> <c_j| U1 |b> for every middle eigenvector c_j."""
    n = preparation.dim
    if not (first_leg.dim == middle.dim == second_leg.dim == final.dim == n):
        raise DimensionMismatchError("two-step amplitude dimensions do not match")
    left = final.coefficients.conj() @ second_leg.matrix @ middle.eigenvectors
    right = middle.eigenvectors.conj().T @ (first_leg.matrix @ preparation.coefficients)
    return PathAmplitudeSet(left * right)
