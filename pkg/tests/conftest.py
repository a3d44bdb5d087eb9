import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from rmm.data import PreparedData, Standardizer, TimeSeries, make_windows, ratio_split

CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for ok, name, detail in CRITERIA:
            terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(name, ok, detail=""):
        CRITERIA.append((bool(ok), name, detail))
        assert ok, f"{name}: {detail}"

    return record


def real_data_dir() -> Path:
    return Path(os.environ.get("RMM_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def write_ett_like(path, T=17420, seed=1, freq="h"):
    """Synthetic file with the ETT column layout: daily cycle plus slow AR noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(T)
    steps_per_day = 24 if freq == "h" else 96
    cols = {}
    for j, c in enumerate(["HUFL", "HULL", "MUFL", "MULL", "LUFL", "LULL"]):
        cols[c] = np.sin(2 * np.pi * t / steps_per_day + j) + 0.3 * rng.standard_normal(T)
    e = rng.standard_normal(T)
    ar = np.zeros(T)
    for i in range(1, T):
        ar[i] = 0.95 * ar[i - 1] + 0.3 * e[i]
    cols["OT"] = 10 + 3 * np.sin(2 * np.pi * t / steps_per_day) + ar + 0.001 * t
    df = pd.DataFrame(cols)
    stamps = pd.date_range("2016-07-01", periods=T, freq="h" if freq == "h" else "15min")
    df.insert(0, "date", stamps.strftime("%Y-%m-%d %H:%M:%S"))
    df.to_csv(path, index=False, float_format="%.3f")
    return Path(path)


@pytest.fixture(scope="session")
def ett_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("ettdata")
    write_ett_like(d / "ETTh1.csv")
    return d


def ar1_series(T=5000, phi=0.8, seed=0):
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(T)
    z = np.zeros(T)
    for t in range(1, T):
        z[t] = phi * z[t - 1] + e[t]
    return z


def raw_prepared(z, tau, horizon, name="synthetic"):
    """PreparedData on an unnormalized univariate series with a 70/10/20 split."""
    z = np.asarray(z, dtype=np.float64)
    ts = TimeSeries(z[:, None], ["z"], name)
    split = ratio_split(len(z))
    windows = make_windows(ts, split, tau, horizon, ["z"])
    return PreparedData(name, "univariate", ts, split, Standardizer(np.zeros(1), np.ones(1)), windows)
