"""Reproducible Monte Carlo generation of pointer readings.

Sampling uses inverse-CDF draws with linear interpolation on the density's
cumulative table, driven by the counter-based Philox generator, so a given
(seed, K, density) always yields bit-identical readings.  Interval cells
are left-closed/right-open: a reading equal to a boundary lands in the
right-hand cell.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import count_cells
from .pointer import ReadingDensity


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """K pointer readings plus the seed that produced them."""

    readings: np.ndarray
    seed: int
    k: int

    def __init__(self, readings, seed: int, k: int | None = None):
        arr = np.asarray(readings, dtype=np.float64).copy()
        if arr.ndim != 1:
            raise ValueError("readings must be a 1-d array")
        if k is None:
            k = arr.shape[0]
        if arr.shape[0] != k:
            raise ValueError(f"got {arr.shape[0]} readings, expected K={k}")
        arr.setflags(write=False)
        object.__setattr__(self, "readings", arr)
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "k", int(k))

    def split(self, at: int) -> tuple["TrialRecord", "TrialRecord"]:
        return (
            TrialRecord(self.readings[:at], self.seed),
            TrialRecord(self.readings[at:], self.seed),
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            self.write_csv(fh)

    def write_csv(self, fh) -> None:
        fh.write(f"# seed={self.seed}\n# K={self.k}\nreading\n")
        for r in self.readings:
            fh.write(f"{float(r)!r}\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "TrialRecord":
        with open(path) as fh:
            return cls.read_csv(fh)

    @classmethod
    def read_csv(cls, fh: io.TextIOBase) -> "TrialRecord":
        seed = k = None
        readings = []
        for line in fh:
            line = line.strip()
            if line.startswith("# seed="):
                seed = int(line.split("=", 1)[1])
            elif line.startswith("# K="):
                k = int(line.split("=", 1)[1])
            elif line and line != "reading":
                readings.append(float(line))
        if seed is None or k is None:
            raise ValueError("CSV header must carry seed and K")
        return cls(np.array(readings), seed, k)


@dataclass(frozen=True, eq=False)
class IntervalPartition:
    """Strictly increasing boundaries splitting the line into M >= 2 cells."""

    boundaries: np.ndarray

    def __init__(self, boundaries):
        arr = np.asarray(boundaries, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise ValueError("need at least one boundary")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        arr.setflags(write=False)
        object.__setattr__(self, "boundaries", arr)

    @property
    def n_cells(self) -> int:
        return self.boundaries.shape[0] + 1

    def cell_bounds(self, nu: int) -> tuple[float, float]:
        b = self.boundaries
        lo = -np.inf if nu == 0 else b[nu - 1]
        hi = np.inf if nu == b.shape[0] else b[nu]
        return float(lo), float(hi)


@dataclass(frozen=True, eq=False)
class CountVector:
    """Per-cell counts of a trial record."""

    counts: np.ndarray
    total: int

    def __init__(self, counts, total: int | None = None):
        arr = np.asarray(counts, dtype=np.int64).copy()
        if total is None:
            total = int(arr.sum())
        if int(arr.sum()) != total:
            raise ValueError(f"counts sum to {arr.sum()}, expected {total}")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        object.__setattr__(self, "total", int(total))

    def __add__(self, other: "CountVector") -> "CountVector":
        return CountVector(self.counts + other.counts)


def sample(density: ReadingDensity, k: int, seed: int) -> TrialRecord:
    """K i.i.d. inverse-CDF draws from the tabulated density."""
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random(k)
    readings = np.interp(u, density.cdf, density.f)
    return TrialRecord(readings, seed, k)


def count(record: TrialRecord, partition: IntervalPartition) -> CountVector:
    return CountVector(count_cells(record.readings, partition.boundaries), record.k)


def frequencies(counts: CountVector) -> np.ndarray:
    if counts.total == 0:
        raise ValueError("cannot compute frequencies of an empty record")
    return counts.counts / counts.total
