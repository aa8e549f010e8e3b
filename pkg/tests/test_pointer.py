import numpy as np
import pytest

import pointerlab as pl
from conftest import (
    BENCH_ABS_SUM2,
    BENCH_ALPHA,
    BENCH_AT,
    BENCH_GRAM,
    BENCH_N2,
    BENCH_SUM_ABS2,
    BENCH_W,
    BENCH_WEAK_MEAN,
)


class TestPointerConfig:
    def test_rejects_nonpositive_width(self):
        with pytest.raises(ValueError, match="positive"):
            pl.PointerConfig(0.0, [-1, 1])

    def test_default_grid_covers_range(self):
        cfg = pl.PointerConfig(2.0, [-1, 1])
        lo, hi, n = cfg.grid
        assert lo <= -13.0 and hi >= 13.0 and n >= 512

    def test_rejects_undersized_grid(self):
        with pytest.raises(ValueError, match="cover"):
            pl.PointerConfig(1.0, [-1, 1], grid=(-2.0, 2.0, 4096))

    def test_small_width_grid_resolves_gaussian(self):
        cfg = pl.PointerConfig(1e-3, [-1, 1])
        lo, hi, n = cfg.grid
        assert (hi - lo) / (n - 1) < 1e-3  # finer than one width

    def test_with_delta_f(self):
        cfg = pl.PointerConfig(1.0, [-1, 1]).with_delta_f(0.5)
        assert cfg.delta_f == 0.5


class TestGaussianAndOverlaps:
    def test_square_normalized(self):
        cfg = pl.PointerConfig(0.7, [0.0, 1.0])
        f = np.linspace(-10, 10, 20001)
        g = pl.pointer.gaussian(cfg, f, 0)
        assert np.trapezoid(g**2, f) == pytest.approx(1.0, abs=1e-10)

    def test_full_line_overlap_closed_form(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        i_full = pl.pointer.overlap_integrals(cfg, pl.pointer.FULL_LINE)
        assert i_full[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert i_full[0, 1] == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_overlap_matches_quadrature(self):
        cfg = pl.PointerConfig(0.8, [-1.0, 0.5])
        f = np.linspace(-0.4, 1.1, 300001)
        g0 = pl.pointer.gaussian(cfg, f, 0)
        g1 = pl.pointer.gaussian(cfg, f, 1)
        quad = np.trapezoid(g0 * g1, f)
        closed = pl.pointer.overlap_integrals(cfg, (-0.4, 1.1))[0, 1]
        assert closed == pytest.approx(quad, abs=1e-9)

    def test_interval_validation(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        with pytest.raises(ValueError, match="a < b"):
            pl.pointer.overlap_integrals(cfg, (1.0, 1.0))


class TestReadingDensity:
    def test_benchmark_normalization(self, bench):
        assert pl.arrival_probability(bench["amps"], bench["config"]) == pytest.approx(
            BENCH_N2, abs=1e-12
        )
        at = pl.normalized_amplitudes(bench["amps"], bench["config"])
        assert np.allclose(at, BENCH_AT, atol=1e-12)

    def test_density_integrates_to_one(self, bench):
        dens = pl.reading_density(bench["amps"], bench["config"])
        assert np.trapezoid(dens.values, dens.f) == pytest.approx(1.0, abs=1e-10)
        assert np.all(dens.values >= 0)

    def test_interval_probabilities_fixture(self, bench):
        w = [
            pl.interval_probability(bench["amps"], bench["config"],
                                    bench["partition"].cell_bounds(nu))
            for nu in range(3)
        ]
        assert np.allclose(w, BENCH_W, atol=1e-12)

    def test_interval_probs_sum_to_one(self, bench):
        assert sum(
            pl.interval_probability(bench["amps"], bench["config"],
                                    bench["partition"].cell_bounds(nu))
            for nu in range(3)
        ) == pytest.approx(1.0, abs=1e-12)

    def test_gram_density_agrees_with_amplitude_density(self, bench):
        gram = pl.GramMatrix(BENCH_GRAM)
        direct = pl.reading_density(bench["amps"], bench["config"])
        from_gram = pl.density_from_gram_matrix(gram, bench["config"])
        assert np.allclose(direct.values, from_gram.values, atol=1e-10)

    def test_cdf_monotone(self, bench):
        dens = pl.reading_density(bench["amps"], bench["config"])
        assert dens.cdf[0] == 0.0 and dens.cdf[-1] == 1.0
        assert np.all(np.diff(dens.cdf) >= 0)

    def test_impossible_postselection(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        with pytest.raises(pl.PostselectionError):
            pl.normalized_amplitudes(pl.PathAmplitudeSet([0.0, 0.0]), cfg)

    def test_degenerate_eigenvalues_merge_coherently(self):
        # equal C: density depends only on |A_1 + A_2|^2
        cfg = pl.PointerConfig(1.0, [0.5, 0.5])
        a = np.array([0.3 + 0.4j, -0.1 + 0.2j])
        dens = pl.reading_density(pl.PathAmplitudeSet(a), cfg)
        merged = pl.reading_density(pl.PathAmplitudeSet([np.sum(a), 0.0]), cfg)
        assert np.allclose(dens.values, merged.values, atol=1e-12)

    def test_exact_mean_matches_quadrature(self, bench):
        dens = pl.reading_density(bench["amps"], bench["config"])
        exact = pl.exact_mean_reading(bench["amps"], bench["config"])
        assert exact == pytest.approx(dens.mean(), abs=1e-6)


class TestArrivalCurve:
    def test_limits(self, bench):
        curve = pl.arrival_probability_curve(bench["amps"], [-1.0, 1.0], [1e-4, 1e4])
        assert curve[0] == pytest.approx(BENCH_SUM_ABS2, abs=1e-8)
        assert curve[1] == pytest.approx(BENCH_ABS_SUM2, abs=1e-8)

    def test_matches_arrival_probability(self, bench):
        curve = pl.arrival_probability_curve(bench["amps"], [-1.0, 1.0], [1.0])
        assert curve[0] == pytest.approx(BENCH_N2, abs=1e-12)


class TestStrongLimit:
    def test_point_masses(self, bench):
        masses, mean = pl.strong_limit_stats(bench["amps"], [-1.0, 1.0])
        w = np.abs(bench["amps"].amplitudes) ** 2
        assert np.allclose(masses, w / w.sum(), atol=1e-14)
        assert mean == pytest.approx(np.dot([-1.0, 1.0], w / w.sum()))

    def test_projector_mean_coherent_complement(self, sign_fixture):
        # complement amplitudes cancel: A_2 + A_3 = 0 for the n=1 projector?
        # here A = (1, -1, 1)/3, so for n = 0 the complement sums to zero
        assert pl.projector_strong_mean(sign_fixture["amps"], 0) == pytest.approx(1.0)

    def test_projector_mean_differs_from_nondegenerate(self, bench):
        # 3-path fixture whose complement amplitudes interfere constructively
        b = pl.QuantumState([1, 1, 1])
        d = pl.QuantumState([1, 1, np.exp(1j * np.pi / 3)])
        obs = pl.Observable.from_basis([0.0, 1.0, 2.0])
        ident = pl.Unitary.identity(3)
        amps = pl.two_step_amplitudes(b, ident, obs, ident, d)
        a = amps.amplitudes
        coherent = pl.projector_strong_mean(amps, 0)
        incoherent = abs(a[0]) ** 2 / np.sum(np.abs(a) ** 2)
        assert abs(coherent - incoherent) > 1e-3


class TestWeakLimit:
    def test_alpha_fixture(self, bench):
        stats = pl.weak_limit_stats(bench["amps"], bench["config"].with_delta_f(100.0))
        assert np.allclose(stats.alpha, BENCH_ALPHA, atol=1e-12)
        assert stats.mean_reading == pytest.approx(BENCH_WEAK_MEAN, abs=1e-12)

    def test_alpha_sums_to_one(self, bench):
        stats = pl.weak_limit_stats(bench["amps"], bench["config"])
        assert np.sum(stats.alpha) == pytest.approx(1.0 + 0.0j, abs=1e-12)

    def test_real_alpha_zero_momentum(self):
        cfg = pl.PointerConfig(50.0, [-1.0, 1.0])
        stats = pl.weak_limit_stats(pl.PathAmplitudeSet([0.25, 0.75]), cfg)
        assert np.allclose(stats.projector_mean_momenta, 0.0, atol=1e-15)

    def test_vanishing_sum_raises(self):
        cfg = pl.PointerConfig(50.0, [-1.0, 1.0])
        with pytest.raises(pl.PostselectionError):
            pl.weak_limit_stats(pl.PathAmplitudeSet([0.5, -0.5]), cfg)


class TestMomentumDensity:
    def test_single_path_zero_mean(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        dens = pl.momentum_density(pl.PathAmplitudeSet([1.0, 0.0]), cfg)
        assert dens.mean() == pytest.approx(0.0, abs=1e-10)

    def test_real_symmetric_even(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        dens = pl.momentum_density(pl.PathAmplitudeSet([0.6, 0.4]), cfg)
        assert dens.mean() == pytest.approx(0.0, abs=1e-10)
        assert np.allclose(dens.values, dens.values[::-1], atol=1e-10)


class TestUnconditional:
    def test_eigenstate_density(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        dens = pl.unconditional_density(pl.PathAmplitudeSet([0.0, 1.0]), cfg)
        g2 = pl.pointer.gaussian(cfg, dens.f, 1) ** 2
        assert np.allclose(dens.values, g2, atol=1e-10)

    def test_mean_independent_of_accuracy(self):
        amps = pl.PathAmplitudeSet([1.0, 1.0])
        for df in (0.1, 1.0, 10.0):
            cfg = pl.PointerConfig(df, [-1.0, 1.0])
            assert pl.unconditional_mean(amps, cfg) == pytest.approx(0.0, abs=1e-14)
            assert pl.unconditional_density(amps, cfg).mean() == pytest.approx(0.0, abs=1e-8)


class TestMixed:
    def test_single_component_matches_pure(self, bench):
        mixed = pl.MixedState([(1.0, bench["b"])])
        stats = pl.mixed_reading_density(
            mixed, bench["u1"], bench["obs"], bench["u2"], bench["d"], bench["config"]
        )
        pure = pl.reading_density(bench["amps"], bench["config"])
        assert np.array_equal(stats.density.values, pure.values)

    def test_unreachable_mixture(self, bench):
        # preparation orthogonal to everything reaching d through identity legs
        b = pl.QuantumState([1, 0])
        d = pl.QuantumState([0, 1])
        ident = pl.Unitary.identity(2)
        mixed = pl.MixedState([(1.0, b)])
        with pytest.raises(pl.PostselectionError):
            pl.mixed_reading_density(mixed, ident, bench["obs"], ident, d, bench["config"])

    def test_two_component_density_normalized(self, bench):
        other = pl.QuantumState([1, -1j])
        mixed = pl.MixedState([(0.3, bench["b"]), (0.7, other)])
        stats = pl.mixed_reading_density(
            mixed, bench["u1"], bench["obs"], bench["u2"], bench["d"], bench["config"]
        )
        dens = stats.density
        assert np.trapezoid(dens.values, dens.f) == pytest.approx(1.0, abs=1e-8)


class TestPostMeasurementState:
    def test_projection_limit(self):
        cfg = pl.PointerConfig(1e-3, [-1.0, 1.0])
        out = pl.post_measurement_state(pl.QuantumState([1, 1]), cfg, reading=1.0)
        assert abs(out.coefficients[1]) == pytest.approx(1.0, abs=1e-10)

    def test_weak_reading_barely_perturbs(self):
        cfg = pl.PointerConfig(1e3, [-1.0, 1.0])
        psi = pl.QuantumState([1, 1j])
        out = pl.post_measurement_state(psi, cfg, reading=0.3)
        fidelity = abs(np.vdot(out.coefficients, psi.coefficients)) ** 2
        assert fidelity > 1 - 1e-4

    def test_eigenstate_unchanged(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        out = pl.post_measurement_state(pl.QuantumState([0, 1]), cfg, reading=0.5)
        assert abs(out.coefficients[1]) == pytest.approx(1.0)

    def test_impossible_reading(self):
        cfg = pl.PointerConfig(0.01, [-1.0, 1.0])
        with pytest.raises(pl.PostselectionError):
            pl.post_measurement_state(pl.QuantumState([0, 1]), cfg, reading=-1e6)
