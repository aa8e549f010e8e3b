"""Shared fixtures: the two-level precession benchmark system and its
independently computed ground-truth values (frozen from oracle scripts)."""

import numpy as np
import pytest

import pointerlab as pl

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)

# frozen oracle values for the benchmark chain (seed-independent)
BENCH_A = np.array([
    -0.21987993711039694 - 0.28297175345800635j,
    -0.38219088631353 - 0.3374424112267791j,
])
BENCH_N2 = 0.5204429335908475
BENCH_AT = np.array([
    -0.3047888294272876 - 0.39224419758747797j,
    -0.5297778159668678 - 0.4677492583841031j,
])
BENCH_MODULI = np.array([0.4967411207910018, 0.7067205268063911])
BENCH_PHI = 0.18691817766274665
BENCH_GRAM = np.array([
    [0.24675174108470066, 0.34494229291209705],
    [0.34494229291209705, 0.4994539030095029],
])
BENCH_W = np.array([0.3006734801273852, 0.3948532854149933, 0.3044732344576214])
BENCH_ALPHA = np.array([
    0.41201731038196626 + 0.04542717723168757j,
    0.5879826896180338 - 0.04542717723168752j,
])
BENCH_SUM_ABS2 = 0.38835745447443515    # sum |A_j|^2 (strong arrival limit)
BENCH_ABS_SUM2 = 0.7474030121598855     # |sum A_j|^2 (weak arrival limit)
BENCH_WEAK_MEAN = 0.17596537923606753
BENCH_B_TPRIME = np.array([
    0.3507880544145058 + 0.2567946785196544j,
    0.8976922439671955 + 0.07178348755259739j,
])
BENCH_D_TPRIME = np.array([
    -0.792593923901217 + 0.22645540682891915j,
    -0.45291081365783825 + 0.33968311024337877j,
])


@pytest.fixture(scope="session")
def bench():
    """The benchmark chain: spin precession, sigma_z coupling, delta_f = 1."""
    b = pl.QuantumState([1 + 8j, 2 + 3j])
    d = pl.QuantumState([3 + 4j, 2 + 7j])
    u1 = pl.unitary_from_hamiltonian(SIGMA_X, np.pi / 3)
    u2 = pl.unitary_from_hamiltonian(SIGMA_X, np.pi / 2)
    obs = pl.Observable.from_basis([-1.0, 1.0])
    amps = pl.two_step_amplitudes(b, u1, obs, u2, d)
    config = pl.PointerConfig(1.0, [-1.0, 1.0])
    partition = pl.IntervalPartition([-0.33, 0.9])
    return {
        "b": b, "d": d, "u1": u1, "u2": u2, "obs": obs,
        "amps": amps, "config": config, "partition": partition,
    }


@pytest.fixture(scope="session")
def sign_fixture():
    """Three-path chain with A_1 = -A_2 != 0 (identity legs, real states)."""
    b = pl.QuantumState(np.array([1, 1, 1]) / np.sqrt(3))
    d = pl.QuantumState(np.array([1, -1, 1]) / np.sqrt(3))
    obs = pl.Observable.from_basis([1.0, 2.0, 3.0])
    ident = pl.Unitary.identity(3)
    amps = pl.two_step_amplitudes(b, ident, obs, ident, d)
    return {"b": b, "d": d, "obs": obs, "ident": ident, "amps": amps}


def random_instance(rng, n):
    """Random instance with the accuracy in the well-conditioned band.

    Cross-term columns of the position design are proportional whenever two
    pair midpoints (C_j + C_k)/2 coincide, so eigenvalue sets with
    near-degenerate pair sums are intrinsically unsolvable; instances are
    redrawn until the design is comfortably above the rank threshold.
    """
    from pointerlab import inverse

    p = n * (n + 1) // 2
    for _ in range(200):
        gaps = np.exp(rng.uniform(np.log(0.7), np.log(2.5), n - 1))
        eig = np.concatenate(([0.0], np.cumsum(gaps)))
        eig -= eig.mean()
        delta_f = (0.6 + 0.4 * rng.random()) * float(gaps.min())
        config = pl.PointerConfig(delta_f, eig)
        probes = inverse.default_probe_points(config, m=3 * p)
        s = inverse.pointwise_design(probes, config).singular_values()
        if s[p - 1] >= 1e-5:
            break
    else:  # pragma: no cover
        raise RuntimeError("could not draw a well-conditioned instance")
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return eig, pl.PathAmplitudeSet(a), delta_f
