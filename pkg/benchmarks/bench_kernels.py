"""Throughput comparison of the numba kernels against the numpy fallbacks.

Run with ``python benchmarks/bench_kernels.py``.  Both implementations are
always imported directly, so the POINTERLAB_NO_NUMBA flag does not matter
here; it only selects which one the package exports.
"""

import time

import numpy as np

from pointerlab import kernels


def timeit(fn, *args, repeats=5, warmup=1):
    for _ in range(warmup):
        fn(*args)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    n = 4
    eig = np.array([-2.1, -0.4, 0.9, 2.3])
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a /= np.linalg.norm(a)
    gram = np.real(np.outer(a, a.conj()))
    f = np.linspace(-10, 10, 200_000)
    lam = np.linspace(-12, 12, 200_000)
    readings = rng.standard_normal(2_000_000)
    boundaries = np.linspace(-2.5, 2.5, 32)

    cases = [
        ("density_from_gram (200k grid, N=4)",
         (f, eig, 0.8, gram),
         kernels._density_from_gram_np),
        ("momentum_intensity (200k grid, N=4)",
         (lam, eig, 0.8, np.real(a).copy(), np.imag(a).copy()),
         kernels._momentum_intensity_np),
        ("count_cells (2M readings, 33 cells)",
         (readings, boundaries),
         kernels._count_cells_np),
    ]
    jit_fns = {}
    if kernels.USE_NUMBA:
        jit_fns = {
            0: kernels._density_from_gram_nb,
            1: kernels._momentum_intensity_nb,
            2: kernels._count_cells_nb,
        }

    print(f"{'kernel':42s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for idx, (name, args, np_fn) in enumerate(cases):
        t_np = timeit(np_fn, *args)
        if idx in jit_fns:
            t_nb = timeit(jit_fns[idx], *args)
            print(f"{name:42s} {t_np*1e3:8.2f}ms {t_nb*1e3:8.2f}ms {t_np/t_nb:7.2f}x")
        else:
            print(f"{name:42s} {t_np*1e3:8.2f}ms {'n/a':>10s} {'n/a':>8s}")


if __name__ == "__main__":
    main()
