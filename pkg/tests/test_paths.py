import numpy as np
import pytest

import pointerlab as pl
from conftest import BENCH_A


def two_level_chain(theta=0.4):
    b = pl.QuantumState([1, 1j])
    u = pl.Unitary([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    obs = pl.Observable.from_basis([-1.0, 1.0])
    return pl.MeasurementChain(b, [(obs, u), (obs, u)])


class TestChain:
    def test_requires_steps(self):
        with pytest.raises(ValueError, match="at least one"):
            pl.MeasurementChain(pl.QuantumState([1, 0]), [])

    def test_dimension_check(self):
        obs3 = pl.Observable.from_basis([0.0, 1.0, 2.0])
        with pytest.raises(pl.DimensionMismatchError):
            pl.MeasurementChain(pl.QuantumState([1, 0]), [(obs3, pl.Unitary.identity(3))])

    def test_truncated(self):
        chain = two_level_chain()
        assert chain.truncated().n_steps == 1
        with pytest.raises(ValueError):
            chain.truncated().truncated()


class TestAmplitudes:
    def test_completeness(self):
        table = pl.path_amplitude_table(two_level_chain())
        total = sum(abs(a) ** 2 for a in table.amplitudes.values())
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_single_step_is_transition(self):
        chain = two_level_chain()
        short = chain.truncated()
        obs, u = short.steps[0]
        direct = pl.transition_amplitude(chain.preparation, obs.eigenstate(1), u)
        assert pl.path_amplitude(short, (1,)) == pytest.approx(direct)

    def test_path_length_check(self):
        with pytest.raises(ValueError, match="path length"):
            pl.path_amplitude(two_level_chain(), (0,))

    def test_benchmark_amplitudes(self, bench):
        assert np.allclose(bench["amps"].amplitudes, BENCH_A, atol=1e-12)

    def test_two_step_matches_explicit_product(self, bench):
        # A_j = <d|U2|c_j><c_j|U1|b>
        b, d = bench["b"], bench["d"]
        u1, u2, obs = bench["u1"], bench["u2"], bench["obs"]
        for j in range(2):
            cj = obs.eigenstate(j)
            expected = (pl.transition_amplitude(cj, d, u2)
                        * pl.transition_amplitude(b, cj, u1))
            assert bench["amps"].amplitudes[j] == pytest.approx(expected, abs=1e-12)


class TestOutcomeDistribution:
    def test_normalized(self):
        dist = pl.outcome_distribution(two_level_chain())
        assert dist.total() == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_coherent_merge(self, sign_fixture):
        # intermediate class {C_1 = C_2} sums amplitudes coherently: with a
        # mixing second leg, the merged probability differs from the
        # incoherent sum of the nondegenerate outcomes
        b = sign_fixture["b"]
        rng = np.random.default_rng(8)
        mix, _ = np.linalg.qr(rng.standard_normal((3, 3))
                              + 1j * rng.standard_normal((3, 3)))
        u2 = pl.Unitary(mix)
        final_obs = pl.Observable.from_basis([0.0, 1.0, 2.0])
        degen = pl.Observable.from_basis([1.0, 1.0, 3.0])
        nondegen = pl.Observable.from_basis([1.0, 2.0, 3.0])
        ident = sign_fixture["ident"]
        dist = pl.outcome_distribution(
            pl.MeasurementChain(b, [(degen, ident), (final_obs, u2)])
        ).probabilities
        dist2 = pl.outcome_distribution(
            pl.MeasurementChain(b, [(nondegen, ident), (final_obs, u2)])
        ).probabilities
        merged = dist[(1.0, 0.0)]
        summed = dist2[(1.0, 0.0)] + dist2[(2.0, 0.0)]
        assert merged != pytest.approx(summed)

    def test_fully_degenerate_reduces_to_marginal(self):
        chain = two_level_chain()
        trivial = pl.Observable.from_basis([5.0, 5.0])
        merged_chain = pl.MeasurementChain(
            chain.preparation, [(trivial, chain.steps[0][1]), chain.steps[1]]
        )
        dist = pl.outcome_distribution(merged_chain)
        # summing out a fully degenerate first step leaves the one-step stats
        one_step = pl.MeasurementChain(
            chain.preparation,
            [(chain.steps[1][0],
              pl.Unitary(chain.steps[1][1].matrix @ chain.steps[0][1].matrix))],
        )
        direct = pl.outcome_distribution(one_step)
        for (c2,), p in direct.probabilities.items():
            assert dist.probabilities[(5.0, c2)] == pytest.approx(p, abs=1e-10)

    def test_marginalize_last(self):
        dist = pl.outcome_distribution(two_level_chain())
        marg = pl.marginalize_last(dist)
        assert marg.total() == pytest.approx(1.0, abs=1e-10)
        assert all(len(k) == 1 for k in marg.probabilities)


class TestPostselection:
    def test_conditional_normalized(self):
        p = pl.postselected_distribution(two_level_chain(), 0)
        assert p.sum() == pytest.approx(1.0)
        assert np.all(p >= 0)

    def test_impossible_postselection(self):
        b = pl.QuantumState([1, 0])
        obs = pl.Observable.from_basis([-1.0, 1.0])
        ident = pl.Unitary.identity(2)
        chain = pl.MeasurementChain(b, [(obs, ident), (obs, ident)])
        with pytest.raises(pl.PostselectionError) as exc:
            pl.postselected_distribution(chain, 1)
        assert exc.value.denominator == 0.0
