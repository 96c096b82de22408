import os
from pathlib import Path

import numpy as np

REPO_ROOT = Path(__file__).resolve().parent.parent
SAMPLE_PRICES = REPO_ROOT / "data" / "sample_synthetic_prices.csv"

WTI_SKIP_REASON = (
    "WTI daily futures file not provided: place it at data/wti_daily_futures.csv "
    "or set WFETEST_WTI_CSV (see data/README.md); the real-data criteria "
    "cannot run without it"
)


def wti_csv_path() -> Path | None:
    env = os.environ.get("WFETEST_WTI_CSV")
    if env and Path(env).exists():
        return Path(env)
    vendored = REPO_ROOT / "data" / "wti_daily_futures.csv"
    if vendored.exists():
        return vendored
    return None


def day_range(n: int, start: str = "1990-01-03") -> np.ndarray:
    first = np.datetime64(start, "D")
    return np.arange(first, first + n)
