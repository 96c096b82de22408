"""Dated price series: ingestion, log returns, profiles, event splits.

Input files are plain text with one ``date,price`` record per line (an
optional header line is allowed).  Dates may be ISO (``YYYY-MM-DD``) or
US (``MM/DD/YYYY``); the format is auto-detected once per file.  All
downstream analysis operates on the log-return series and its profile
(cumulative sum of demeaned returns).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, NamedTuple

import numpy as np

from .errors import DataError, FormatError, InsufficientDataError

# Default event cut dates (overridable wherever they are used).  The Gulf
# War and NAFTA dates follow the historical record: 1990-08-02 and
# 1994-01-01.
GULF_WAR = np.datetime64("1990-08-02")
IRAQ_WAR = np.datetime64("2003-03-20")
NAFTA = np.datetime64("1994-01-01")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PriceSeries:
    """Dated positive prices, sorted ascending by date.

    Invariants: at least 2 observations, strictly increasing dates,
    every price positive and finite.
    """

    dates: np.ndarray  # datetime64[D]
    prices: np.ndarray  # float64

    def __post_init__(self):
        dates = _readonly(np.asarray(self.dates, dtype="datetime64[D]"))
        prices = _readonly(np.asarray(self.prices, dtype=np.float64))
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)
        if dates.shape != prices.shape or dates.ndim != 1:
            raise DataError("dates and prices must be 1-d arrays of equal length")
        if len(prices) < 2:
            raise InsufficientDataError("price series needs at least 2 observations")
        if not np.all(dates[1:] > dates[:-1]):
            raise DataError("dates must be strictly increasing")
        if not np.all(np.isfinite(prices)) or not np.all(prices > 0):
            raise DataError("prices must be positive and finite")

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    """Log returns; each value is dated by the later of its two prices."""

    dates: np.ndarray  # datetime64[D]
    values: np.ndarray  # float64

    def __post_init__(self):
        dates = _readonly(np.asarray(self.dates, dtype="datetime64[D]"))
        values = _readonly(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)
        if dates.shape != values.shape or dates.ndim != 1:
            raise DataError("dates and values must be 1-d arrays of equal length")
        if len(values) == 0:
            raise InsufficientDataError("return series is empty")
        if not np.all(np.isfinite(values)):
            raise DataError("returns must be finite")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Profile:
    """Cumulative sum of demeaned increments.

    ``profile()`` output always ends at 0 up to rounding; the type itself
    admits any finite values so that analytically constructed profiles
    (linear ramps, polynomials) can be fed to the detrenders directly.
    """

    values: np.ndarray  # float64

    def __post_init__(self):
        values = _readonly(np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) == 0:
            raise DataError("profile must be a nonempty 1-d array")
        if not np.all(np.isfinite(values)):
            raise DataError("profile values must be finite")

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)


class LoadedPrices(NamedTuple):
    """Result of :func:`load_prices`.

    ``dropped`` counts records discarded for missing/non-numeric/
    non-positive prices; ``date_format`` is the detected format
    (``"iso"`` or ``"us"``).
    """

    series: PriceSeries
    dropped: int
    date_format: str


_DATE_FORMATS = {"iso": "%Y-%m-%d", "us": "%m/%d/%Y"}


def _parse_date(text: str, fmt: str) -> np.datetime64 | None:
    try:
        return np.datetime64(datetime.strptime(text, _DATE_FORMATS[fmt]).date())
    except ValueError:
        return None


def _detect_date_format(text: str) -> str | None:
    for fmt in ("iso", "us"):
        if _parse_date(text, fmt) is not None:
            return fmt
    return None


def load_prices(
    source: str | Path | IO[str] | IO[bytes],
    *,
    date_format: str | None = None,
) -> LoadedPrices:
    """Parse ``date,price`` lines into a :class:`PriceSeries`.

    Accepts a path or an open text/byte stream.  Lines starting with
    ``#`` are ignored (this tool's own artifacts carry such a preamble)
    and one header line is skipped.  Records with missing, non-numeric,
    or non-positive prices are dropped and counted; a line with an
    unparseable date is a :class:`FormatError` naming the line.
    Duplicate dates raise :class:`DataError`.  Output is sorted
    ascending by date.

    ``date_format`` may force ``"iso"`` or ``"us"``; by default the
    format is detected from the first data line and applied to the whole
    file.
    """
    if date_format is not None and date_format not in _DATE_FORMATS:
        raise FormatError(f"unknown date format {date_format!r} (use 'iso' or 'us')")

    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        raw = source.read()
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        lines = raw.splitlines()

    records: list[tuple[np.datetime64, float]] = []
    dropped = 0
    fmt = date_format
    header_allowed = True

    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        date_text = parts[0]
        price_text = parts[1] if len(parts) > 1 else ""

        if fmt is None:
            detected = _detect_date_format(date_text)
            if detected is None:
                if header_allowed:
                    header_allowed = False
                    continue
                raise FormatError(f"line {lineno}: unparseable date {date_text!r}")
            fmt = detected
        date = _parse_date(date_text, fmt)
        if date is None:
            if header_allowed:
                header_allowed = False
                continue
            raise FormatError(f"line {lineno}: unparseable date {date_text!r}")
        header_allowed = False

        if len(parts) > 2:
            raise FormatError(f"line {lineno}: expected 'date,price', got {line!r}")
        try:
            price = float(price_text)
        except ValueError:
            dropped += 1  # missing or non-numeric price
            continue
        if not np.isfinite(price) or price <= 0:
            dropped += 1
            continue
        records.append((date, price))

    if not records:
        raise FormatError("no parseable price records in input")

    records.sort(key=lambda rec: rec[0])
    dates = np.array([r[0] for r in records], dtype="datetime64[D]")
    prices = np.array([r[1] for r in records], dtype=np.float64)

    dup_mask = dates[1:] == dates[:-1]
    if np.any(dup_mask):
        dups = sorted({str(d) for d in dates[1:][dup_mask]})
        raise DataError(f"duplicate dates: {', '.join(dups)}")

    return LoadedPrices(PriceSeries(dates, prices), dropped, fmt or "iso")


def log_returns(p: PriceSeries) -> ReturnSeries:
    """r[t] = ln(price[t+1]) - ln(price[t]), dated by the later day."""
    if len(p) < 2:
        raise InsufficientDataError("need at least 2 prices for returns")
    values = np.diff(np.log(p.prices))
    return ReturnSeries(p.dates[1:], values)


def profile(r: ReturnSeries) -> Profile:
    """Cumulative sum of the demeaned returns; ends at 0 up to rounding."""
    values = np.asarray(r.values, dtype=np.float64)
    return Profile(np.cumsum(values - values.mean()))


def split_by_dates(
    p: PriceSeries, cut_dates: Iterable[np.datetime64 | str]
) -> list[PriceSeries]:
    """Split into contiguous segments at the given cut dates.

    An observation dated before a cut goes to the earlier segment; the
    cut date itself starts the next one.  Cuts must be strictly
    increasing and strictly inside the series' date span.  Concatenating
    the segments reproduces the input exactly.
    """
    cuts = np.array([np.datetime64(c, "D") for c in cut_dates], dtype="datetime64[D]")
    if len(cuts) == 0:
        return [p]
    if not np.all(cuts[1:] > cuts[:-1]):
        raise DataError("cut dates must be strictly increasing")
    if cuts[0] <= p.dates[0] or cuts[-1] >= p.dates[-1]:
        raise DataError(
            f"cut dates must lie strictly inside the span "
            f"[{p.dates[0]}, {p.dates[-1]}]"
        )

    bounds = [0] + [int(np.searchsorted(p.dates, c, side="left")) for c in cuts]
    bounds.append(len(p))
    segments = []
    for j, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
        if hi - lo < 2:
            raise DataError(
                f"segment {j + 1} would have {hi - lo} observation(s); "
                f"each segment needs at least 2"
            )
        segments.append(PriceSeries(p.dates[lo:hi], p.prices[lo:hi]))
    return segments
