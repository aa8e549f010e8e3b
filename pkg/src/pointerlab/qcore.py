"""Finite-dimensional complex linear algebra: states, observables, unitaries.

All values are immutable after construction and all operations are pure, so
they can be shared freely between threads.  Dimensions are capped at
``MAX_DIM`` (dense O(N^3) algorithms throughout).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 64

NORM_TOL = 1e-12
ORTHO_TOL = 1e-10
HERMITIAN_TOL = 1e-10


class DimensionMismatchError(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


def _as_complex_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d coefficient vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized pure state in the fixed reference basis.

    Unnormalized input is accepted and normalized on construction.
    """

    coefficients: np.ndarray

    def __init__(self, coefficients):
        arr = _as_complex_vector(coefficients)
        if arr.shape[0] < 2:
            raise ValueError(f"state dimension must be >= 2, got {arr.shape[0]}")
        if arr.shape[0] > MAX_DIM:
            raise ValueError(f"state dimension {arr.shape[0]} exceeds MAX_DIM={MAX_DIM}")
        norm = np.linalg.norm(arr)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        arr = arr / norm
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    @property
    def dim(self) -> int:
        return self.coefficients.shape[0]


@dataclass(frozen=True, eq=False)
class Unitary:
    """Unitary operator; U+U = 1 is checked to ORTHO_TOL on construction."""

    matrix: np.ndarray

    def __init__(self, matrix):
        mat = np.asarray(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        defect = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if defect > ORTHO_TOL:
            raise ValueError(f"matrix is not unitary: max |U+U - 1| = {defect:.3e}")
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Unitary":
        return cls(np.eye(n))


def _degeneracy_classes(eigenvalues: np.ndarray, tolerance: float) -> tuple[tuple[int, ...], ...]:
    """Partition eigenvalue indices into transitively closed equality classes.

    Indices i, j land in the same class whenever they are connected by a
    chain of pairs with |C_i - C_j| <= tolerance.
    """
    order = np.argsort(eigenvalues, kind="stable")
    classes: list[list[int]] = []
    for idx in order:
        if classes and abs(eigenvalues[idx] - eigenvalues[classes[-1][-1]]) <= tolerance:
            classes[-1].append(int(idx))
        else:
            classes.append([int(idx)])
    return tuple(tuple(sorted(cls)) for cls in classes)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian observable given by orthonormal eigenvectors and real eigenvalues.

    ``eigenvectors`` holds one eigenvector per column.  Eigenvalues may be
    degenerate; the degeneracy partition (transitively closed under
    |C_i - C_j| <= degeneracy_tolerance) is computed once and cached.
    """

    eigenvectors: np.ndarray
    eigenvalues: np.ndarray
    degeneracy_tolerance: float = field(default=-1.0)

    def __init__(self, eigenvectors, eigenvalues, degeneracy_tolerance: float | None = None):
        vecs = np.asarray(eigenvectors, dtype=np.complex128)
        vals = np.asarray(eigenvalues, dtype=np.float64)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
            raise ValueError(f"expected a square eigenvector matrix, got shape {vecs.shape}")
        n = vecs.shape[0]
        if vals.shape != (n,):
            raise ValueError(f"expected {n} eigenvalues, got shape {vals.shape}")
        defect = np.max(np.abs(vecs.conj().T @ vecs - np.eye(n)))
        if defect > ORTHO_TOL:
            raise ValueError(f"eigenvectors are not orthonormal: max defect {defect:.3e}")
        if degeneracy_tolerance is None:
            scale = float(np.max(np.abs(vals))) if np.any(vals) else 1.0
            degeneracy_tolerance = 1e-9 * scale
        vecs = vecs.copy()
        vecs.setflags(write=False)
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "degeneracy_tolerance", float(degeneracy_tolerance))
        object.__setattr__(
            self, "_classes", _degeneracy_classes(vals, float(degeneracy_tolerance))
        )

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def degeneracy_classes(self) -> tuple[tuple[int, ...], ...]:
        """Index classes of equal eigenvalues, each sorted ascending."""
        return self._classes

    def class_eigenvalues(self) -> np.ndarray:
        """One representative eigenvalue per degeneracy class (class mean)."""
        return np.array([np.mean(self.eigenvalues[list(cls)]) for cls in self._classes])

    def eigenstate(self, j: int) -> QuantumState:
        return QuantumState(self.eigenvectors[:, j])

    @classmethod
    def from_basis(cls, eigenvalues, degeneracy_tolerance: float | None = None) -> "Observable":
        """Observable diagonal in the reference basis."""
        vals = np.asarray(eigenvalues, dtype=np.float64)
        return cls(np.eye(vals.shape[0]), vals, degeneracy_tolerance)


@dataclass(frozen=True, eq=False)
class MixedState:
    """Convex mixture of pure states; weights must sum to 1."""

    components: tuple[tuple[float, QuantumState], ...]

    def __init__(self, components):
        comps = tuple((float(w), s) for w, s in components)
        if not comps:
            raise ValueError("mixture must contain at least one component")
        for w, _ in comps:
            if not 0.0 < w <= 1.0:
                raise ValueError(f"component weight {w} outside (0, 1]")
        total = sum(w for w, _ in comps)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"weights sum to {total}, expected 1")
        dims = {s.dim for _, s in comps}
        if len(dims) != 1:
            raise DimensionMismatchError(f"mixed dimensions in mixture: {sorted(dims)}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim


def unitary_from_hamiltonian(hamiltonian, dt: float) -> Unitary:
    """exp(-i H dt) for a Hermitian generator, via eigendecomposition.

    Exact (to roundoff) for the small dense matrices targeted here; no
    step-size tuning needed.
    """
    ham = np.asarray(hamiltonian, dtype=np.complex128)
    if ham.ndim != 2 or ham.shape[0] != ham.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {ham.shape}")
    defect = np.max(np.abs(ham - ham.conj().T))
    if defect > HERMITIAN_TOL:
        raise ValueError(f"generator is not Hermitian: max |H - H+| = {defect:.3e}")
    w, v = np.linalg.eigh(ham)
    return Unitary((v * np.exp(-1j * w * dt)) @ v.conj().T)


def evolve(state: QuantumState, unitary: Unitary) -> QuantumState:
    if state.dim != unitary.dim:
        raise DimensionMismatchError(f"state dim {state.dim} != unitary dim {unitary.dim}")
    return QuantumState(unitary.matrix @ state.coefficients)


def inner(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"state dims differ: {a.dim} != {b.dim}")
    return complex(np.vdot(a.coefficients, b.coefficients))
