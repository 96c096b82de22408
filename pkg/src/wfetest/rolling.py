"""Estimate-and-test pipeline in moving windows.

Each window of ``window_size`` consecutive returns gets the whole
treatment: profile, fluctuation function on a grid built for the window
length, minimal-residual scaling-range search over a fixed number of
grid points, exponent fit, and a shuffle ensemble over the SAME range.
The result row carries the window's H against the ensemble's 2.5/97.5%
band and a flag for where H falls relative to it.

Windows are independent work units.  Replicate seeds mix the base seed
with the window's start index, so any single window recomputes in
isolation to bit-identical values and dropping data after some date
leaves all earlier-ending windows unchanged.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .detrend import Estimator, ScaleGrid, default_scales
from .errors import ConfigError, DataError, InsufficientDataError
from .scaling import DEFAULT_FIT_WINDOW
from .shuffletest import DEFAULT_SEED, efficiency_test
from .timeseries import PriceSeries, ReturnSeries, log_returns

# selected ranges entirely below this scale tend to sit on a crossover
LOW_RANGE_SCALE = 50

WINDOW_CSV_HEADER = "end_date,H,q025,q975,flag,s_lo,s_hi"

FLAGS = ("below", "inside", "above")


@dataclass(frozen=True)
class WindowResult:
    """One window's exponent against its shuffle quantile band."""

    end_date: np.datetime64
    h: float
    q025: float
    q975: float
    flag: str
    s_lo: int
    s_hi: int

    def __post_init__(self):
        if self.q025 > self.q975:
            raise DataError("q025 must not exceed q975")
        if self.flag not in FLAGS:
            raise DataError(f"flag must be one of {FLAGS}")
        expected = _band_flag(self.h, self.q025, self.q975)
        if self.flag != expected:
            raise DataError(
                f"flag {self.flag!r} inconsistent with H={self.h} and band "
                f"[{self.q025}, {self.q975}]"
            )

    @property
    def outside(self) -> bool:
        return self.flag != "inside"

    @property
    def low_scale_range(self) -> bool:
        """True when the selected range sits entirely below s = 50.

        Such windows usually straddle a crossover in F(s) and their H is
        a short-scale artifact; downstream plots may want to mark them.
        """
        return self.s_hi < LOW_RANGE_SCALE

    def csv_row(self) -> str:
        return (
            f"{self.end_date},{float(self.h)!r},{float(self.q025)!r},"
            f"{float(self.q975)!r},{self.flag},{int(self.s_lo)},{int(self.s_hi)}"
        )


def _band_flag(h: float, q025: float, q975: float) -> str:
    if h < q025:
        return "below"
    if h > q975:
        return "above"
    return "inside"


def window_result(
    r: ReturnSeries,
    start: int,
    window_size: int,
    est: Estimator,
    grid: ScaleGrid | None = None,
    window_len: int = DEFAULT_FIT_WINDOW,
    n_shuffles: int = 1000,
    seed: int = DEFAULT_SEED,
) -> WindowResult:
    """Full pipeline on the window of returns starting at ``start``.

    Replicate seeds depend only on (seed, start, replicate index), never
    on which other windows are being computed, so this reproduces the
    corresponding row of :func:`rolling_analysis` bit-exactly.
    """
    if start < 0 or start + window_size > len(r.values):
        raise ConfigError(
            f"window [{start}, {start + window_size}) outside the "
            f"{len(r.values)} available returns"
        )
    if grid is None:
        grid = default_scales(window_size)
    sub = ReturnSeries(
        r.dates[start : start + window_size],
        r.values[start : start + window_size],
    )
    res = efficiency_test(
        sub,
        est,
        grid=grid,
        range_policy="auto",
        window_len=window_len,
        n_replicates=n_shuffles,
        seed=seed,
        spawn_prefix=(start,),
    )
    return WindowResult(
        end_date=sub.dates[-1],
        h=res.h,
        q025=res.q025,
        q975=res.q975,
        flag=_band_flag(res.h, res.q025, res.q975),
        s_lo=res.s_lo,
        s_hi=res.s_hi,
    )


def _window_job(args) -> WindowResult:
    r, start, window_size, est, grid, window_len, n_shuffles, seed = args
    return window_result(
        r, start, window_size, est, grid, window_len, n_shuffles, seed
    )


def rolling_analysis(
    p: PriceSeries,
    window_size: int = 1000,
    step: int = 1,
    est: Estimator = Estimator.dfa(),
    n_shuffles: int = 1000,
    window_len: int = DEFAULT_FIT_WINDOW,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> list[WindowResult]:
    """One WindowResult per window of returns, advancing by ``step``.

    Produces exactly ``(n_returns - window_size) // step + 1`` results,
    ordered by window position regardless of worker scheduling.
    ``progress`` is called as ``progress(done, total)`` after each
    window finishes.
    """
    if step < 1:
        raise ConfigError(f"step must be >= 1, got {step}")
    if n_shuffles < 1:
        raise ConfigError(f"n_shuffles must be >= 1, got {n_shuffles}")
    try:
        grid = default_scales(window_size)
    except InsufficientDataError as exc:
        raise ConfigError(f"window_size {window_size} too small: {exc}") from exc
    r = log_returns(p)
    if len(r.values) < window_size:
        raise ConfigError(
            f"series has {len(r.values)} returns, fewer than the window "
            f"size {window_size}"
        )

    starts = range(0, len(r.values) - window_size + 1, step)
    jobs = [
        (r, start, window_size, est, grid, window_len, n_shuffles, seed)
        for start in starts
    ]
    results: list[WindowResult] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_window_job, jobs):
                results.append(res)
                if progress is not None:
                    progress(len(results), len(jobs))
    else:
        for job in jobs:
            results.append(_window_job(job))
            if progress is not None:
                progress(len(results), len(jobs))
    return results
