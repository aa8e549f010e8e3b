"""Hot numeric kernels, JIT-compiled with numba when available.

Setting the environment variable ``POINTERLAB_NO_NUMBA=1`` (before import)
selects the pure-numpy fallback path.  Both paths compute identical values;
``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("POINTERLAB_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        USE_NUMBA = False


def _density_from_gram_np(f: np.ndarray, eigenvalues: np.ndarray, delta_f: float,
                          gram: np.ndarray) -> np.ndarray:
    """rho(f) = sum_jj' G_j(f) G_j'(f) X_jj' on a grid (X symmetric)."""
    pref = (np.pi * delta_f**2) ** -0.25
    g = pref * np.exp(-((f[:, None] - eigenvalues[None, :]) ** 2) / (2.0 * delta_f**2))
    return np.einsum("fj,fk,jk->f", g, g, gram)


def _momentum_intensity_np(lam: np.ndarray, eigenvalues: np.ndarray, delta_f: float,
                           amp_re: np.ndarray, amp_im: np.ndarray) -> np.ndarray:
    """|g~(lam)|^2 |sum_j exp(-i lam C_j) A_j|^2 on a momentum grid."""
    amps = amp_re + 1j * amp_im
    phase = np.exp(-1j * lam[:, None] * eigenvalues[None, :])
    shifted = phase @ amps
    gsq = (delta_f**2 / np.pi) ** 0.5 * np.exp(-(lam**2) * delta_f**2)
    return gsq * np.abs(shifted) ** 2


def _count_cells_np(readings: np.ndarray, boundaries: np.ndarray) -> np.ndarray:
    """Cell counts for a left-closed/right-open partition of the line."""
    idx = np.searchsorted(boundaries, readings, side="right")
    return np.bincount(idx, minlength=boundaries.shape[0] + 1).astype(np.int64)


if USE_NUMBA:

    @njit(cache=True)
    def _density_from_gram_nb(f, eigenvalues, delta_f, gram):  # pragma: no cover
        n = eigenvalues.shape[0]
        pref = (np.pi * delta_f**2) ** -0.25
        out = np.empty(f.shape[0])
        g = np.empty(n)
        for i in range(f.shape[0]):
            for j in range(n):
                g[j] = pref * np.exp(-((f[i] - eigenvalues[j]) ** 2) / (2.0 * delta_f**2))
            acc = 0.0
            for j in range(n):
                acc += g[j] * g[j] * gram[j, j]
                for k in range(j + 1, n):
                    acc += 2.0 * g[j] * g[k] * gram[j, k]
            out[i] = acc
        return out

    @njit(cache=True)
    def _momentum_intensity_nb(lam, eigenvalues, delta_f, amp_re, amp_im):  # pragma: no cover
        n = eigenvalues.shape[0]
        out = np.empty(lam.shape[0])
        for i in range(lam.shape[0]):
            sr = 0.0
            si = 0.0
            for j in range(n):
                c = np.cos(lam[i] * eigenvalues[j])
                s = -np.sin(lam[i] * eigenvalues[j])
                sr += c * amp_re[j] - s * amp_im[j]
                si += c * amp_im[j] + s * amp_re[j]
            gsq = (delta_f**2 / np.pi) ** 0.5 * np.exp(-(lam[i] ** 2) * delta_f**2)
            out[i] = gsq * (sr * sr + si * si)
        return out

    @njit(cache=True)
    def _count_cells_nb(readings, boundaries):  # pragma: no cover
        m = boundaries.shape[0] + 1
        counts = np.zeros(m, dtype=np.int64)
        for r in readings:
            lo = 0
            hi = boundaries.shape[0]
            while lo < hi:
                mid = (lo + hi) // 2
                if r < boundaries[mid]:
                    hi = mid
                else:
                    lo = mid + 1
            counts[lo] += 1
        return counts

    density_from_gram = _density_from_gram_nb
    momentum_intensity = _momentum_intensity_nb
    count_cells = _count_cells_nb
else:
    density_from_gram = _density_from_gram_np
    momentum_intensity = _momentum_intensity_np
    count_cells = _count_cells_np
