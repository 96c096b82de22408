"""Fluctuation functions over scale grids: DMA and DFA.

Both detrenders consume a profile (cumulative sum of demeaned
increments) and produce the root-mean-square detrended residual F(s)
over a grid of integer box sizes s.

DMA subtracts a moving average of span s whose placement is set by the
position parameter theta in [0, 1]: the window at index i covers
ceil((s-1)*(1-theta)) points in the past and floor((s-1)*theta) points
in the future, so theta=0 is the backward average, theta=0.5 centered,
theta=1 forward.  Only indices whose full window lies inside the series
contribute, and F(s) is normalized by the count of those indices.

DFA fits a least-squares polynomial of a given order in non-overlapping
boxes of length s, covering the series once from the first point and
once from the last point backward; every box's residuals enter the RMS,
so points covered twice contribute twice.

All kernels accept a batch of profiles as a 2-d array and treat rows
independently; the single-series operations are the one-row case, so
every caller shares one numerical path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, InsufficientDataError, ScaleRangeError
from .timeseries import Profile

# Minimum number of grid points: the scaling-range search needs 15, plus
# one point of slack.
MIN_GRID_POINTS = 16

DMA_MIN_SCALE = 3


@dataclass(frozen=True)
class ScaleGrid:
    """Strictly increasing integer box sizes."""

    scales: np.ndarray

    def __post_init__(self):
        scales = np.ascontiguousarray(np.asarray(self.scales, dtype=np.int64))
        scales.setflags(write=False)
        object.__setattr__(self, "scales", scales)
        if scales.ndim != 1 or len(scales) == 0:
            raise DataError("scale grid must be a nonempty 1-d array")
        if not np.all(scales[1:] > scales[:-1]):
            raise DataError("scales must be strictly increasing")
        if scales[0] < 2:
            raise ScaleRangeError(f"scale {int(scales[0])} is too small")

    def __len__(self) -> int:
        return len(self.scales)


@dataclass(frozen=True)
class DmaConfig:
    """Moving-average position parameter theta in [0, 1]."""

    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DataError(f"theta must be in [0, 1], got {self.theta}")


@dataclass(frozen=True)
class FluctuationFunction:
    """Paired (s, F(s)) samples with the method tag and source length."""

    scales: np.ndarray
    f: np.ndarray
    method: str
    n: int

    def __post_init__(self):
        scales = np.ascontiguousarray(np.asarray(self.scales, dtype=np.int64))
        f = np.ascontiguousarray(np.asarray(self.f, dtype=np.float64))
        scales.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "f", f)
        if scales.shape != f.shape or scales.ndim != 1:
            raise DataError("scales and f must be 1-d arrays of equal length")
        if not np.all(scales[1:] > scales[:-1]):
            raise DataError("scales must be strictly increasing")
        if not np.all(np.isfinite(f)) or np.any(f < 0):
            raise DataError("fluctuation values must be finite and nonnegative")

    def __len__(self) -> int:
        return len(self.scales)

    def to_json_dict(self, *, ndigits: int | None = None) -> dict:
        f = self.f if ndigits is None else np.round(self.f, ndigits)
        return {
            "method": self.method,
            "n": self.n,
            "scales": [int(s) for s in self.scales],
            "F": [float(v) for v in f],
        }


@dataclass(frozen=True)
class Estimator:
    """Which detrender to run: DMA with a theta, or DFA with an order."""

    kind: str
    theta: float = 0.0
    order: int = 1

    def __post_init__(self):
        if self.kind not in ("dma", "dfa"):
            raise DataError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "dma" and not 0.0 <= self.theta <= 1.0:
            raise DataError(f"theta must be in [0, 1], got {self.theta}")
        if self.kind == "dfa" and self.order < 1:
            raise DataError(f"dfa order must be >= 1, got {self.order}")

    @classmethod
    def dma(cls, theta: float) -> "Estimator":
        return cls("dma", theta=theta)

    @classmethod
    def dfa(cls, order: int = 1) -> "Estimator":
        return cls("dfa", order=order)

    @property
    def tag(self) -> str:
        if self.kind == "dma":
            named = {0.0: "BDMA", 0.5: "CDMA", 1.0: "FDMA"}
            return named.get(self.theta, f"DMA(theta={self.theta:g})")
        return "DFA" if self.order == 1 else f"DFA({self.order})"

    @property
    def min_scale(self) -> int:
        return DMA_MIN_SCALE if self.kind == "dma" else self.order + 2

    def fluctuation_matrix(self, profiles: np.ndarray, scales: np.ndarray) -> np.ndarray:
        if self.kind == "dma":
            return dma_fluctuation_matrix(profiles, scales, self.theta)
        return dfa_fluctuation_matrix(profiles, scales, self.order)


def default_scales(n: int, points_per_decade: int = 20) -> ScaleGrid:
    """Log-spaced integer scales from 10 to n // 10.

    The requested density is a target; the grid is densified as needed
    so that at least MIN_GRID_POINTS distinct scales come out.  Raises
    InsufficientDataError when [10, n // 10] cannot hold that many
    integers.
    """
    if points_per_decade < 1:
        raise DataError("points_per_decade must be >= 1")
    s_max = n // 10
    available = s_max - 10 + 1
    if available < MIN_GRID_POINTS:
        raise InsufficientDataError(
            f"series of length {n} supports {max(available, 0)} scales in "
            f"[10, {s_max}]; need at least {MIN_GRID_POINTS}"
        )
    decades = math.log10(s_max / 10.0)
    num = max(math.ceil(points_per_decade * decades) + 1, MIN_GRID_POINTS)
    for trial in (num, 2 * num, 4 * num, 8 * num):
        scales = np.unique(
            np.round(np.logspace(1.0, math.log10(s_max), trial)).astype(np.int64)
        )
        if len(scales) >= MIN_GRID_POINTS:
            break
    else:
        scales = np.arange(10, s_max + 1, dtype=np.int64)
    return ScaleGrid(scales)


def _window_split(s: int, theta: float) -> tuple[int, int]:
    """(past, future) point counts for the DMA window at box size s.

    future = floor((s-1)*theta), past = (s-1) - future, so the window
    always holds exactly s points.  Products within 1e-9 of an integer
    are snapped before flooring so that thetas like 0.3 behave as
    written despite binary rounding.
    """
    a = (s - 1) * theta
    if abs(a - round(a)) < 1e-9:
        a = round(a)
    future = int(math.floor(a))
    past = (s - 1) - future
    return past, future


def dma_fluctuation_matrix(
    profiles: np.ndarray, scales: np.ndarray, theta: float
) -> np.ndarray:
    """F(s) for each profile row; returns shape (rows, len(scales)).

    Moving-window sums are taken as differences of an extended-precision
    prefix sum: plain float64 prefix sums lose enough precision on long
    trending profiles to break the closed-form identities at the 1e-10
    level.
    """
    profiles = np.atleast_2d(np.asarray(profiles, dtype=np.float64))
    n = profiles.shape[1]
    scales = np.asarray(scales, dtype=np.int64)
    _check_scales(scales, n, DMA_MIN_SCALE)

    prefix = np.zeros((profiles.shape[0], n + 1), dtype=np.longdouble)
    np.cumsum(profiles, axis=1, dtype=np.longdouble, out=prefix[:, 1:])

    out = np.empty((profiles.shape[0], len(scales)), dtype=np.float64)
    for j, s in enumerate(scales):
        s = int(s)
        past, future = _window_split(s, theta)
        mov = (prefix[:, s:] - prefix[:, :-s]).astype(np.float64) / s
        resid = profiles[:, past : n - future] - mov
        out[:, j] = np.sqrt(np.mean(np.square(resid), axis=1))
    return out


def dfa_fluctuation_matrix(
    profiles: np.ndarray, scales: np.ndarray, order: int
) -> np.ndarray:
    """F(s) for each profile row; returns shape (rows, len(scales))."""
    if order < 1:
        raise DataError(f"dfa order must be >= 1, got {order}")
    profiles = np.atleast_2d(np.asarray(profiles, dtype=np.float64))
    rows, n = profiles.shape
    scales = np.asarray(scales, dtype=np.int64)
    _check_scales(scales, n, order + 2)

    out = np.empty((rows, len(scales)), dtype=np.float64)
    for j, s in enumerate(scales):
        s = int(s)
        k = n // s
        boxes = np.concatenate(
            [
                profiles[:, : k * s].reshape(rows, k, s),
                profiles[:, n - k * s :].reshape(rows, k, s),
            ],
            axis=1,
        )
        # local abscissa scaled to [-1, 1] keeps the fit well conditioned
        t = np.arange(s, dtype=np.float64) - (s - 1) / 2.0
        design = np.vander(t / t[-1], order + 1, increasing=True)
        pinv_t = np.linalg.pinv(design).T
        coef = boxes @ pinv_t
        resid = boxes - coef @ design.T
        out[:, j] = np.sqrt(
            np.mean(np.square(resid).reshape(rows, 2 * k * s), axis=1)
        )
    return out


def _check_scales(scales: np.ndarray, n: int, min_scale: int) -> None:
    if len(scales) == 0:
        raise DataError("empty scale grid")
    if scales[0] < min_scale:
        raise ScaleRangeError(
            f"scale {int(scales[0])} below method minimum {min_scale}"
        )
    if scales[-1] > n:
        raise ScaleRangeError(
            f"scale {int(scales[-1])} exceeds series length {n}"
        )


def dma_fluctuation(y: Profile, grid: ScaleGrid, cfg: DmaConfig) -> FluctuationFunction:
    """DMA fluctuation function of a single profile."""
    f = dma_fluctuation_matrix(y.values, grid.scales, cfg.theta)[0]
    return FluctuationFunction(grid.scales, f, Estimator.dma(cfg.theta).tag, y.n)


def dfa_fluctuation(y: Profile, grid: ScaleGrid, order: int = 1) -> FluctuationFunction:
    """DFA fluctuation function of a single profile."""
    f = dfa_fluctuation_matrix(y.values, grid.scales, order)[0]
    return FluctuationFunction(grid.scales, f, Estimator.dfa(order).tag, y.n)


def fluctuation(y: Profile, grid: ScaleGrid, est: Estimator) -> FluctuationFunction:
    """Fluctuation function of the profile under the given estimator."""
    f = est.fluctuation_matrix(y.values, grid.scales)[0]
    return FluctuationFunction(grid.scales, f, est.tag, y.n)
