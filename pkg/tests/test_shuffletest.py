from itertools import permutations

import numpy as np
import pytest

from wfetest.detrend import Estimator, ScaleGrid, default_scales
from wfetest.errors import DataError, EstimationError
from wfetest.shuffletest import (
    DEFAULT_SEED,
    SIGNIFICANCE_LEVEL,
    ShuffleTestResult,
    _chunk_size,
    _shuffled_slopes_chunk,
    efficiency_test,
    replicate_rng,
    shuffle,
    shuffle_exponents,
    two_tailed_p,
)
from wfetest.synth import FgnSpec, generate_fgn
from wfetest.timeseries import ReturnSeries

from conftest import day_range


def make_returns(n=1500, hurst=0.5, seed=11):
    return ReturnSeries(day_range(n), generate_fgn(FgnSpec(n=n, hurst=hurst, seed=seed)))


class TestTwoTailedP:
    def test_hand_count_three_members(self):
        assert two_tailed_p(0.52, np.array([0.45, 0.50, 0.55])) == 2 / 3

    def test_hand_count_five_members(self):
        # mean 0.5; |e - mean| = .1, .05, 0, .05, .1; threshold .02
        ens = np.array([0.40, 0.45, 0.50, 0.55, 0.60])
        assert two_tailed_p(0.52, ens) == 0.8

    def test_far_h_has_zero_p(self):
        assert two_tailed_p(10.0, np.array([0.45, 0.50, 0.55])) == 0.0

    def test_strict_inequality_keeps_ties_out(self):
        # |h - mean| = 0.05 equals two members' deviation: not counted
        assert two_tailed_p(0.55, np.array([0.45, 0.50, 0.55])) == 0.0

    def test_empty_ensemble_rejected(self):
        with pytest.raises(DataError):
            two_tailed_p(0.5, np.array([]))

    def test_p_range(self):
        rng = np.random.default_rng(0)
        ens = rng.normal(0.5, 0.02, size=500)
        for h in (0.3, 0.5, 0.52, 0.7):
            assert 0.0 <= two_tailed_p(h, ens) <= 1.0


class TestShuffle:
    def test_permutes_multiset_keeps_dates(self):
        r = ReturnSeries(day_range(20), np.arange(20.0))
        s = shuffle(r, 3)
        assert sorted(s.values.tolist()) == list(range(20))
        assert np.array_equal(s.dates, r.dates)
        assert not np.array_equal(s.values, r.values)

    def test_seed_determinism(self):
        r = make_returns(200)
        assert np.array_equal(shuffle(r, 5).values, shuffle(r, 5).values)
        assert not np.array_equal(shuffle(r, 5).values, shuffle(r, 6).values)

    def test_generator_passthrough(self):
        r = make_returns(50)
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(5)))
        a = shuffle(r, gen)
        b = shuffle(r, 5)
        assert np.array_equal(a.values, b.values)

    def test_permutations_uniform(self):
        # all 6 orderings of 3 values should appear ~1000 times in 6000
        r = ReturnSeries(day_range(3), np.array([0.0, 1.0, 2.0]))
        counts = dict.fromkeys(permutations((0.0, 1.0, 2.0)), 0)
        for seed in range(6000):
            counts[tuple(shuffle(r, seed).values)] += 1
        for perm, count in counts.items():
            assert abs(count / 6000 - 1 / 6) < 0.02, (perm, count)


class TestReplicateRng:
    def test_same_coordinates_same_stream(self):
        a = replicate_rng(42, 7).standard_normal(4)
        b = replicate_rng(42, 7).standard_normal(4)
        assert np.array_equal(a, b)

    def test_distinct_coordinates_distinct_streams(self):
        base = replicate_rng(42, 7).standard_normal(4)
        assert not np.array_equal(base, replicate_rng(42, 8).standard_normal(4))
        assert not np.array_equal(base, replicate_rng(43, 7).standard_normal(4))
        assert not np.array_equal(
            base, replicate_rng(42, 7, prefix=(1,)).standard_normal(4)
        )


class TestShuffleExponents:
    def setup_method(self):
        self.r = make_returns(1200)
        self.grid = default_scales(1200)
        self.range = (int(self.grid.scales[0]), int(self.grid.scales[-1]))

    def test_ensemble_indexed_by_replicate(self):
        ens, redraws = shuffle_exponents(
            self.r.values, Estimator.dfa(), self.grid.scales, self.range,
            40, base_seed=9,
        )
        assert ens.shape == (40,) and redraws == 0
        # replicate i recomputed alone must equal its slot
        for i in (0, 17, 39):
            alone = _shuffled_slopes_chunk(
                (self.r.values, Estimator.dfa(), self.grid.scales,
                 self.range, 9, (), i, 1)
            )[0]
            assert ens[i] == alone

    def test_worker_count_is_invisible(self):
        args = (self.r.values, Estimator.dfa(), self.grid.scales, self.range, 70, 4)
        e1, _ = shuffle_exponents(*args, workers=1)
        e2, _ = shuffle_exponents(*args, workers=2)
        e3, _ = shuffle_exponents(*args, workers=3)
        assert np.array_equal(e1, e2) and np.array_equal(e1, e3)

    def test_count_not_divisible_by_chunk(self):
        chunk = _chunk_size(1200)
        n = chunk + 3
        ens, _ = shuffle_exponents(
            self.r.values, Estimator.dfa(), self.grid.scales, self.range,
            n, base_seed=2,
        )
        assert ens.shape == (n,) and np.all(np.isfinite(ens))

    def test_degenerate_series_exhausts_redraw_cap(self):
        # constant returns shuffle to constant: F = 0 on every replicate
        values = np.zeros(1200)
        with pytest.raises(EstimationError, match="redraw"):
            shuffle_exponents(
                values, Estimator.dfa(), self.grid.scales, self.range,
                50, base_seed=1,
            )

    def test_replicate_count_validated(self):
        with pytest.raises(DataError):
            shuffle_exponents(
                self.r.values, Estimator.dfa(), self.grid.scales,
                self.range, 0, base_seed=1,
            )


class TestEfficiencyTest:
    def test_full_range_policy_uses_grid_ends(self):
        r = make_returns(1500)
        res = efficiency_test(r, Estimator.dfa(), n_replicates=60, seed=3)
        grid = default_scales(1500)
        assert res.s_lo == int(grid.scales[0])
        assert res.s_hi == int(grid.scales[-1])
        assert res.method == "DFA"
        assert res.n_replicates == 60

    def test_auto_range_policy_selects_window(self):
        r = make_returns(1500)
        res = efficiency_test(
            r, Estimator.dfa(), range_policy="auto", n_replicates=30, seed=3
        )
        grid = default_scales(1500).scales
        count = int(np.sum((grid >= res.s_lo) & (grid <= res.s_hi)))
        assert count == 15

    def test_unknown_policy_rejected(self):
        with pytest.raises(DataError):
            efficiency_test(make_returns(800), Estimator.dfa(), range_policy="best")

    def test_single_replicate_p_is_zero_or_one(self):
        r = make_returns(900)
        res = efficiency_test(r, Estimator.dfa(), n_replicates=1, seed=4)
        assert res.p in (0.0, 1.0)
        assert res.q025 == res.q975 == res.mean_hs

    def test_determinism_and_seed_sensitivity(self):
        r = make_returns(1000)
        a = efficiency_test(r, Estimator.dma(0.0), n_replicates=50, seed=5)
        b = efficiency_test(r, Estimator.dma(0.0), n_replicates=50, seed=5)
        c = efficiency_test(r, Estimator.dma(0.0), n_replicates=50, seed=6)
        assert np.array_equal(a.ensemble, b.ensemble) and a == b
        assert not np.array_equal(a.ensemble, c.ensemble)

    def test_null_data_not_rejected(self):
        res = efficiency_test(
            make_returns(2048, seed=14), Estimator.dfa(),
            n_replicates=300, seed=7,
        )
        assert res.p >= SIGNIFICANCE_LEVEL
        assert not res.rejected
        assert res.verdict == "not rejected"

    def test_strong_memory_rejected(self):
        res = efficiency_test(
            make_returns(4096, hurst=0.85, seed=14), Estimator.dfa(),
            n_replicates=400, seed=7,
        )
        assert res.p < SIGNIFICANCE_LEVEL
        assert res.rejected

    def test_explicit_grid_respected(self):
        r = make_returns(1000)
        grid = ScaleGrid(np.arange(10, 60))
        res = efficiency_test(r, Estimator.dfa(), grid=grid, n_replicates=30, seed=1)
        assert res.s_lo == 10 and res.s_hi == 59

    def test_summary_line(self):
        res = efficiency_test(make_returns(900), Estimator.dma(0.5),
                              n_replicates=25, seed=2)
        line = res.summary()
        assert line.startswith("CDMA: H=")
        assert "p=" in line and "0.01" in line


class TestShuffleTestResult:
    def valid_kwargs(self):
        ensemble = np.array([0.48, 0.5, 0.52, 0.49, 0.51])
        return dict(
            method="DFA", h=0.5, ensemble=ensemble,
            mean_hs=float(ensemble.mean()),
            p=two_tailed_p(0.5, ensemble),
            q025=0.48, q975=0.52, n_replicates=5, seed=1,
            s_lo=10, s_hi=100,
        )

    def test_valid_construction(self):
        res = ShuffleTestResult(**self.valid_kwargs())
        assert res.n_redraws == 0

    def test_stored_p_must_reproduce(self):
        kwargs = self.valid_kwargs()
        kwargs["p"] = 0.123
        with pytest.raises(DataError):
            ShuffleTestResult(**kwargs)

    def test_quantiles_must_be_ordered(self):
        kwargs = self.valid_kwargs()
        kwargs["q025"], kwargs["q975"] = kwargs["q975"], kwargs["q025"]
        with pytest.raises(DataError):
            ShuffleTestResult(**kwargs)

    def test_ensemble_length_checked(self):
        kwargs = self.valid_kwargs()
        kwargs["n_replicates"] = 6
        with pytest.raises(DataError):
            ShuffleTestResult(**kwargs)

    def test_json_dict_round_trips(self):
        res = ShuffleTestResult(**self.valid_kwargs())
        d = res.to_json_dict()
        assert d["H"] == 0.5 and d["n_replicates"] == 5
        assert "ensemble" not in d
        assert d["rejected_at_1pct"] is False
        d = res.to_json_dict(include_ensemble=True)
        assert d["ensemble"] == res.ensemble.tolist()

    def test_default_seed_constant(self):
        assert DEFAULT_SEED == 42
        assert SIGNIFICANCE_LEVEL == 0.01
