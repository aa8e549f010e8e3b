import io

import numpy as np
import pytest

import pointerlab as pl


@pytest.fixture(scope="module")
def density():
    cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
    return pl.reading_density(pl.PathAmplitudeSet([0.6, 0.8j]), cfg)


class TestSampling:
    def test_reproducible(self, density):
        a = pl.sample(density, 500, 17)
        b = pl.sample(density, 500, 17)
        assert np.array_equal(a.readings, b.readings)

    def test_seed_changes_stream(self, density):
        a = pl.sample(density, 500, 17)
        b = pl.sample(density, 500, 18)
        assert not np.array_equal(a.readings, b.readings)

    def test_prefix_property(self, density):
        # first k draws of a longer run equal a shorter run with the same seed
        long = pl.sample(density, 1000, 5)
        short = pl.sample(density, 400, 5)
        assert np.array_equal(long.readings[:400], short.readings)

    def test_rejects_zero_trials(self, density):
        with pytest.raises(ValueError, match="K must be"):
            pl.sample(density, 0, 1)

    def test_empirical_mean_converges(self, density):
        rec = pl.sample(density, 200000, 9)
        assert rec.readings.mean() == pytest.approx(density.mean(), abs=0.02)


class TestTrialRecord:
    def test_split(self, density):
        rec = pl.sample(density, 100, 1)
        head, tail = rec.split(30)
        assert head.k == 30 and tail.k == 70
        assert np.array_equal(np.concatenate([head.readings, tail.readings]), rec.readings)

    def test_csv_round_trip(self, density, tmp_path):
        rec = pl.sample(density, 50, 123)
        path = tmp_path / "r.csv"
        rec.to_csv(path)
        back = pl.TrialRecord.from_csv(path)
        assert back.seed == 123 and back.k == 50
        assert np.array_equal(back.readings, rec.readings)

    def test_csv_header_required(self):
        with pytest.raises(ValueError, match="seed"):
            pl.TrialRecord.read_csv(io.StringIO("reading\n1.0\n"))


class TestPartitionAndCounts:
    def test_boundaries_strictly_increasing(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            pl.IntervalPartition([0.0, 0.0])

    def test_cell_bounds(self):
        part = pl.IntervalPartition([-1.0, 2.0])
        assert part.n_cells == 3
        assert part.cell_bounds(0) == (-np.inf, -1.0)
        assert part.cell_bounds(1) == (-1.0, 2.0)
        assert part.cell_bounds(2) == (2.0, np.inf)

    def test_boundary_lands_right(self):
        part = pl.IntervalPartition([0.0])
        rec = pl.TrialRecord(np.array([-0.5, 0.0, 0.5]), 0)
        counts = pl.count(rec, part)
        assert list(counts.counts) == [1, 2]

    def test_counts_sum_to_k(self, density):
        part = pl.IntervalPartition([-0.33, 0.9])
        rec = pl.sample(density, 777, 2)
        counts = pl.count(rec, part)
        assert counts.counts.sum() == 777

    def test_count_addition(self, density):
        part = pl.IntervalPartition([-0.33, 0.9])
        rec = pl.sample(density, 400, 3)
        a, b = rec.split(150)
        total = pl.count(a, part) + pl.count(b, part)
        assert np.array_equal(total.counts, pl.count(rec, part).counts)

    def test_frequencies(self, density):
        part = pl.IntervalPartition([0.0])
        rec = pl.sample(density, 1000, 4)
        freqs = pl.frequencies(pl.count(rec, part))
        assert freqs.sum() == pytest.approx(1.0)

    def test_frequencies_match_interval_probabilities(self):
        cfg = pl.PointerConfig(1.0, [-1.0, 1.0])
        amps = pl.PathAmplitudeSet([0.6, 0.8j])
        dens = pl.reading_density(amps, cfg)
        part = pl.IntervalPartition([-0.33, 0.9])
        rec = pl.sample(dens, 100000, 6)
        freqs = pl.frequencies(pl.count(rec, part))
        probs = [pl.interval_probability(amps, cfg, part.cell_bounds(nu))
                 for nu in range(3)]
        assert np.allclose(freqs, probs, atol=0.01)
