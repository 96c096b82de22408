"""Permutation test of the no-memory null hypothesis.

The statistic is the scaling exponent H.  The return series is shuffled
``n_replicates`` times, the exponent of each shuffled series is
estimated over the SAME scaling range as the original, and the
two-tailed p-value is

    p = Prob(|H_s - <H_s>| > |H - <H_s>|)

with <H_s> the ensemble mean and the inequality strict, so ties favor
non-rejection.  The null is rejected at the 0.01 level.

Replicate i draws its permutation from a generator seeded by
``SeedSequence(base_seed, spawn_key=(*prefix, i))``, so any subset of
replicates can be recomputed independently and results are identical
for any worker count.  A replicate whose estimate is degenerate is
redrawn from indices past ``n_replicates`` (capped at 1% of the
ensemble) and the redraw count is reported.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detrend import Estimator, ScaleGrid, FluctuationFunction, default_scales
from .errors import DataError, EstimationError
from .scaling import DEFAULT_FIT_WINDOW, detect_scaling_range, fit_power_law, slopes_in_range
from .timeseries import ReturnSeries

DEFAULT_SEED = 42
SIGNIFICANCE_LEVEL = 0.01

RANGE_POLICIES = ("full", "auto")


@dataclass(frozen=True, eq=False)
class ShuffleTestResult:
    """Original exponent, shuffle ensemble, and the two-tailed p-value."""

    method: str
    h: float
    ensemble: np.ndarray = field(repr=False)
    mean_hs: float
    p: float
    q025: float
    q975: float
    n_replicates: int
    seed: int
    s_lo: int
    s_hi: int
    n_redraws: int = 0

    def __eq__(self, other):
        if not isinstance(other, ShuffleTestResult):
            return NotImplemented
        return np.array_equal(self.ensemble, other.ensemble) and all(
            getattr(self, name) == getattr(other, name)
            for name in (
                "method", "h", "mean_hs", "p", "q025", "q975",
                "n_replicates", "seed", "s_lo", "s_hi", "n_redraws",
            )
        )

    def __post_init__(self):
        ensemble = np.ascontiguousarray(np.asarray(self.ensemble, dtype=np.float64))
        ensemble.setflags(write=False)
        object.__setattr__(self, "ensemble", ensemble)
        if len(ensemble) != self.n_replicates:
            raise DataError("ensemble length must equal n_replicates")
        if not 0.0 <= self.p <= 1.0 or self.q025 > self.q975:
            raise DataError("invalid p-value or quantiles")
        if two_tailed_p(self.h, ensemble) != self.p:
            raise DataError("stored p does not reproduce from the stored ensemble")
        if self.n_replicates >= 100 and not (
            self.q025 <= self.mean_hs <= self.q975
        ):
            raise DataError("ensemble mean outside its own 2.5/97.5% band")

    @property
    def rejected(self) -> bool:
        return self.p < SIGNIFICANCE_LEVEL

    @property
    def verdict(self) -> str:
        return "rejected" if self.rejected else "not rejected"

    def summary(self) -> str:
        return (
            f"{self.method}: H={self.h:.3f} <H^s>={self.mean_hs:.3f} "
            f"p={self.p:.4f} -> null {self.verdict} at {SIGNIFICANCE_LEVEL:g}"
        )

    def to_json_dict(self, include_ensemble: bool = False) -> dict:
        out = {
            "method": self.method,
            "H": self.h,
            "mean_Hs": self.mean_hs,
            "p": self.p,
            "q025": self.q025,
            "q975": self.q975,
            "n_replicates": self.n_replicates,
            "seed": self.seed,
            "s_lo": self.s_lo,
            "s_hi": self.s_hi,
            "n_redraws": self.n_redraws,
            "rejected_at_1pct": self.rejected,
        }
        if include_ensemble:
            out["ensemble"] = [float(v) for v in self.ensemble]
        return out


def replicate_rng(
    base_seed: int, index: int, prefix: tuple[int, ...] = ()
) -> np.random.Generator:
    """Generator for one replicate; depends only on (base_seed, prefix, index)."""
    seq = np.random.SeedSequence(base_seed, spawn_key=(*prefix, index))
    return np.random.Generator(np.random.PCG64(seq))


def shuffle(r: ReturnSeries, seed: int | np.random.Generator) -> ReturnSeries:
    """Uniformly random permutation of the values; dates keep their order."""
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return ReturnSeries(r.dates, rng.permutation(r.values))


def two_tailed_p(h: float, ensemble: np.ndarray) -> float:
    """Fraction of the ensemble strictly farther from its mean than h is."""
    e = np.asarray(ensemble, dtype=np.float64)
    if len(e) == 0:
        raise DataError("ensemble must be nonempty")
    mean = float(e.mean())
    return float(np.count_nonzero(np.abs(e - mean) > abs(h - mean)) / len(e))


def _chunk_size(n: int) -> int:
    # keep per-chunk work in cache-friendly territory; depends only on n
    return int(min(256, max(16, (1 << 21) // max(n, 1))))


def _shuffled_slopes_chunk(args) -> np.ndarray:
    values, est, scales, s_range, base_seed, prefix, start, count = args
    rows = np.empty((count, len(values)), dtype=np.float64)
    for i in range(count):
        rng = replicate_rng(base_seed, start + i, prefix)
        perm = rng.permutation(values)
        rows[i] = np.cumsum(perm - perm.mean())
    f = est.fluctuation_matrix(rows, scales)
    return slopes_in_range(f, scales, s_range)


def shuffle_exponents(
    values: np.ndarray,
    est: Estimator,
    scales: np.ndarray,
    s_range: tuple[int, int],
    n_replicates: int,
    base_seed: int,
    spawn_prefix: tuple[int, ...] = (),
    workers: int = 1,
) -> tuple[np.ndarray, int]:
    """Exponents of n_replicates shuffled series over a fixed range.

    Returns the ensemble ordered by replicate index and the number of
    redraws that were needed for degenerate replicates.
    """
    if n_replicates < 1:
        raise DataError("n_replicates must be >= 1")
    values = np.asarray(values, dtype=np.float64)
    chunk = _chunk_size(len(values))
    jobs = [
        (values, est, scales, s_range, base_seed, spawn_prefix, start,
         min(chunk, n_replicates - start))
        for start in range(0, n_replicates, chunk)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_shuffled_slopes_chunk, jobs))
    else:
        parts = [_shuffled_slopes_chunk(job) for job in jobs]
    ensemble = np.concatenate(parts)

    # redraw degenerate replicates from indices past the ensemble
    max_redraws = max(1, n_replicates // 100)
    n_redraws = 0
    next_index = n_replicates
    for slot in np.flatnonzero(~np.isfinite(ensemble)):
        while True:
            if n_redraws >= max_redraws:
                raise EstimationError(
                    f"{n_redraws} replicate redraws exhausted the cap "
                    f"({max_redraws}); series is degenerate for {est.tag}"
                )
            n_redraws += 1
            redraw = _shuffled_slopes_chunk(
                (values, est, scales, s_range, base_seed, spawn_prefix,
                 next_index, 1)
            )[0]
            next_index += 1
            if np.isfinite(redraw):
                ensemble[slot] = redraw
                break
    return ensemble, n_redraws


def efficiency_test(
    r: ReturnSeries,
    est: Estimator,
    grid: ScaleGrid | None = None,
    range_policy: str = "full",
    window_len: int = DEFAULT_FIT_WINDOW,
    n_replicates: int = 10000,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    spawn_prefix: tuple[int, ...] = (),
) -> ShuffleTestResult:
    """Estimate H, build the shuffle ensemble, and test the null H = <H_s>.

    ``range_policy`` is ``"full"`` (fit the whole grid, the default for
    whole-series runs) or ``"auto"`` (minimal-residual window of
    ``window_len`` grid points).  Shuffled replicates always reuse the
    original series' scaling range.
    """
    if range_policy not in RANGE_POLICIES:
        raise DataError(f"range_policy must be one of {RANGE_POLICIES}")
    values = np.asarray(r.values, dtype=np.float64)
    if grid is None:
        grid = default_scales(len(values))

    prof = np.cumsum(values - values.mean())
    f = est.fluctuation_matrix(prof, grid.scales)[0]
    ff = FluctuationFunction(grid.scales, f, est.tag, len(values))
    if range_policy == "auto":
        s_range = detect_scaling_range(ff, window_len)
    else:
        s_range = (int(grid.scales[0]), int(grid.scales[-1]))
    fit = fit_power_law(ff, s_range)

    ensemble, n_redraws = shuffle_exponents(
        values, est, grid.scales, (fit.s_lo, fit.s_hi), n_replicates,
        seed, spawn_prefix, workers,
    )
    q025, q975 = np.quantile(ensemble, [0.025, 0.975], method="linear")
    return ShuffleTestResult(
        method=est.tag,
        h=fit.h,
        ensemble=ensemble,
        mean_hs=float(ensemble.mean()),
        p=two_tailed_p(fit.h, ensemble),
        q025=float(q025),
        q975=float(q975),
        n_replicates=n_replicates,
        seed=seed,
        s_lo=fit.s_lo,
        s_hi=fit.s_hi,
        n_redraws=n_redraws,
    )
