"""Benchmark time series: CSV ingestion, chronological splits, z-scoring and
sliding lookback/horizon windows."""

from __future__ import annotations

import logging
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .io import read_container, sha256_file, write_container

log = logging.getLogger(__name__)


class DataError(Exception):
    """Input data is missing, malformed or unusable."""


@dataclass(frozen=True)
class CsvSchema:
    timestamp: str = "date"
    columns: tuple | None = None  # None: every column except the timestamp
    missing: str = "reject"  # or "ffill"
    max_bad_fraction: float = 0.01


@dataclass(eq=False)
class TimeSeries:
    values: np.ndarray  # (T, D)
    columns: list
    name: str = ""
    period: str = ""
    timestamps: list = field(default_factory=list, repr=False)
    report: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def D(self) -> int:
        return self.values.shape[1]

    def select(self, columns) -> "TimeSeries":
        idx = [self.columns.index(c) for c in columns]
        return TimeSeries(self.values[:, idx].copy(), list(columns), self.name,
                          self.period, self.timestamps, dict(self.report))


def load_csv(path, schema: CsvSchema = CsvSchema(), name: str = "", period: str = "") -> TimeSeries:
    """Read a header-row CSV into a ``(T, D)`` float64 matrix.

    Rows must already be in strictly increasing time order. Rows with missing
    or non-numeric cells are dropped (``missing="reject"``) or forward filled
    (``missing="ffill"``); failing more than ``max_bad_fraction`` of the rows
    is an error.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"data file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: cannot parse CSV ({exc})") from exc
    df.columns = [c.strip() for c in df.columns]
    if schema.timestamp not in df.columns:
        raise DataError(f"{path}: timestamp column {schema.timestamp!r} not found")
    cols = list(schema.columns) if schema.columns else [c for c in df.columns if c != schema.timestamp]
    missing_cols = [c for c in cols if c not in df.columns]
    if missing_cols:
        raise DataError(f"{path}: columns not found: {missing_cols}")

    stamps = df[schema.timestamp].str.strip()
    if stamps.duplicated().any():
        dup = stamps[stamps.duplicated()].iloc[0]
        raise DataError(f"{path}: duplicate timestamp {dup!r}")
    parsed = pd.to_datetime(stamps, errors="coerce")
    if parsed.notna().all():
        monotone = bool((parsed.diff().iloc[1:] > pd.Timedelta(0)).all())
    else:
        monotone = bool((stamps.iloc[1:].values > stamps.iloc[:-1].values).all())
    if not monotone:
        raise DataError(f"{path}: timestamps are not strictly increasing")

    values = df[cols].apply(lambda s: pd.to_numeric(s.str.strip(), errors="coerce")).to_numpy(np.float64)
    values[~np.isfinite(values)] = np.nan
    bad = np.isnan(values).any(axis=1)
    n_bad = int(bad.sum())
    n_rows = len(values)
    if n_rows == 0:
        raise DataError(f"{path}: no data rows")
    if n_bad > schema.max_bad_fraction * n_rows:
        raise DataError(f"{path}: {n_bad} of {n_rows} rows malformed or incomplete "
                        f"(tolerance {schema.max_bad_fraction:.1%})")
    keep = np.ones(n_rows, dtype=bool)
    filled = 0
    if schema.missing == "reject":
        keep = ~bad
    elif schema.missing == "ffill":
        frame = pd.DataFrame(values).ffill()
        filled = int(n_bad)
        values = frame.to_numpy()
        keep = ~np.isnan(values).any(axis=1)  # leading gaps cannot be filled
    else:
        raise ValueError(f"unknown missing-value policy {schema.missing!r}")
    values = np.ascontiguousarray(values[keep])
    report = {"file": str(path), "rows_read": n_rows, "rows_dropped": int((~keep).sum()),
              "rows_filled": filled, "columns": len(cols)}
    log.info("loaded %s: %d rows x %d columns (%d dropped)", path.name, len(values), len(cols),
             report["rows_dropped"])
    return TimeSeries(values, cols, name or path.stem, period,
                      list(stamps[keep]), report)


@dataclass(frozen=True)
class SplitSpec:
    """Chronological partition ``[0, train_end) [train_end, val_end) [val_end, test_end)``."""

    train_end: int
    val_end: int
    test_end: int

    def __post_init__(self):
        if not (0 < self.train_end <= self.val_end <= self.test_end):
            raise ValueError(f"invalid split boundaries {self}")

    def bounds(self, part: str) -> tuple[int, int]:
        return {"train": (0, self.train_end), "val": (self.train_end, self.val_end),
                "test": (self.val_end, self.test_end)}[part]

    def to_dict(self) -> dict:
        return {"train_end": self.train_end, "val_end": self.val_end, "test_end": self.test_end}


def ratio_split(T: int, train: float = 0.7, test: float = 0.2) -> SplitSpec:
    n_train = int(T * train)
    n_test = int(T * test)
    return SplitSpec(n_train, T - n_test, T)


def ett_split(T: int, steps_per_hour: int = 1) -> SplitSpec:
    """12/4/4 months of 30 days."""
    month = 30 * 24 * steps_per_hour
    end = 20 * month
    if T < end:
        raise DataError(f"ETT series too short: {T} < {end} rows")
    return SplitSpec(12 * month, 16 * month, end)


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    def transform(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mean) / self.std

    def inverse(self, z: np.ndarray) -> np.ndarray:
        return z * self.std + self.mean


def standardize(ts: TimeSeries, split: SplitSpec) -> tuple[TimeSeries, Standardizer]:
    """Per-channel z-score with train-partition mean and population std."""
    train = ts.values[: split.train_end]
    if len(train) < 2:
        raise DataError("train partition needs at least 2 rows")
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    flat = [c for c, s in zip(ts.columns, std) if not s > 0]
    if flat:
        raise DataError(f"zero train variance in channel(s) {flat[:5]}")
    scaler = Standardizer(mean, std)
    out = TimeSeries(scaler.transform(ts.values), list(ts.columns), ts.name, ts.period,
                     ts.timestamps, dict(ts.report))
    return out, scaler


@dataclass(eq=False)
class WindowedDataset:
    """Supervised pairs for one partition, stored as anchors into a series.

    For anchor ``t`` (0-based row index) the input window is rows
    ``t-tau+1 .. t`` of the input channels and the target is rows
    ``t+1 .. t+H`` of the target channels, flattened time-major.
    """

    series: np.ndarray  # (T, D) full normalized series
    anchors: np.ndarray
    tau: int
    horizon: int
    input_idx: tuple
    target_idx: tuple
    part: str = ""

    def __len__(self) -> int:
        return len(self.anchors)

    @property
    def d_in(self) -> int:
        return len(self.input_idx)

    @property
    def d_out(self) -> int:
        return len(self.target_idx)

    def window(self, i: int) -> np.ndarray:
        t = int(self.anchors[i])
        return self.series[t - self.tau + 1 : t + 1][:, list(self.input_idx)]

    def windows(self, sl=slice(None)) -> np.ndarray:
        """``(n, tau, d_in)`` array of input windows for ``anchors[sl]``."""
        a = self.anchors[sl]
        offs = np.arange(-self.tau + 1, 1)
        return self.series[(a[:, None] + offs)[:, :, None], np.asarray(self.input_idx)[None, None, :]]

    def targets(self, sl=slice(None)) -> np.ndarray:
        a = self.anchors[sl]
        offs = np.arange(1, self.horizon + 1)
        y = self.series[(a[:, None] + offs)[:, :, None], np.asarray(self.target_idx)[None, None, :]]
        return y.reshape(len(a), -1)

    def subset(self, anchors: np.ndarray, part: str = "") -> "WindowedDataset":
        return WindowedDataset(self.series, anchors, self.tau, self.horizon,
                               self.input_idx, self.target_idx, part or self.part)


def window_anchors(split: SplitSpec, part: str, tau: int, horizon: int) -> np.ndarray:
    """Valid anchors for a partition.

    Targets stay inside the partition. Validation and test windows may reach
    back into earlier partitions for their lookback context.
    """
    start, end = split.bounds(part)
    first = tau - 1 if part == "train" else max(start - 1, tau - 1)
    last = end - 1 - horizon
    if last < first:
        return np.zeros(0, dtype=np.int64)
    return np.arange(first, last + 1, dtype=np.int64)


def make_windows(ts: TimeSeries, split: SplitSpec, tau: int, horizon: int,
                 target_channels, input_channels=None) -> dict[str, WindowedDataset]:
    if tau < 1 or horizon < 1:
        raise ValueError("tau and horizon must be >= 1")
    input_channels = list(ts.columns) if input_channels is None else list(input_channels)
    tin = tuple(ts.columns.index(c) for c in input_channels)
    tout = tuple(ts.columns.index(c) for c in target_channels)
    out = {}
    for part in ("train", "val", "test"):
        anchors = window_anchors(split, part, tau, horizon)
        start, end = split.bounds(part)
        if end > start and len(anchors) == 0:
            raise DataError(f"{part} partition too short for tau={tau}, horizon={horizon} "
                            f"({end - start} rows)")
        out[part] = WindowedDataset(ts.values, anchors, tau, horizon, tin, tout, part)
    return out


# --------------------------------------------------------------------------
# Benchmark presets

@dataclass(frozen=True)
class DatasetPreset:
    name: str
    period: str
    split: str  # "ett-hour", "ett-minute" or "ratio"
    univariate: tuple | None  # (file, target column)
    multivariate: str | None  # file
    timestamp: str = "date"
    source_url: str = ""
    download_url: str = ""  # base URL for a direct CSV fetch, if one exists
    sha256: dict = field(default_factory=dict)
    tau: int | None = None
    reservoir_size: int | None = None

    def file_for(self, task: str) -> str:
        if task == "univariate":
            if self.univariate is None:
                raise ValueError(f"{self.name} has no univariate task")
            return self.univariate[0]
        if task == "multivariate":
            if self.multivariate is None:
                raise ValueError(f"{self.name} has no multivariate task")
            return self.multivariate
        raise ValueError(f"unknown task {task!r}")

    def make_split(self, T: int) -> SplitSpec:
        if self.split == "ett-hour":
            return ett_split(T, 1)
        if self.split == "ett-minute":
            return ett_split(T, 4)
        return ratio_split(T)


_ETT_URL = "https://raw.githubusercontent.com/zhouhaoyi/ETDataset/main/ETT-small/"


def _ett(name: str, minute: bool) -> DatasetPreset:
    return DatasetPreset(name, "15 minutes" if minute else "1 hour",
                         "ett-minute" if minute else "ett-hour",
                         (f"{name}.csv", "OT"), f"{name}.csv",
                         source_url="https://github.com/zhouhaoyi/ETDataset", download_url=_ETT_URL)


def ili_lookback(T: int, N: int = 150) -> tuple[int, int]:
    """Lookback and reservoir size for short weekly series: tau <= min(train/2, 104), N < tau/2."""
    tau = min(int(T * 0.7) // 2, 104)
    n = min(N, (tau - 1) // 2)
    return tau, n


PRESETS = {
    "ETTh1": _ett("ETTh1", False),
    "ETTh2": _ett("ETTh2", False),
    "ETTm1": _ett("ETTm1", True),
    "ETTm2": _ett("ETTm2", True),
    "ECL": DatasetPreset("ECL", "1 hour", "ratio", ("ECL.csv", "MT_320"), "ECL.csv",
                         source_url="https://archive.ics.uci.edu/dataset/321/electricityloaddiagrams20112014"),
    "Weather": DatasetPreset("Weather", "1 hour", "ratio", ("WTH.csv", "WetBulbCelsius"), "weather.csv",
                             source_url="https://www.ncei.noaa.gov/data/local-climatological-data/"),
    "Exchange": DatasetPreset("Exchange", "1 day", "ratio", None, "exchange_rate.csv"),
    "ILI": DatasetPreset("ILI", "1 week", "ratio", None, "national_illness.csv",
                         source_url="https://gis.cdc.gov/grasp/fluview/fluportaldashboard.html",
                         tau=ili_lookback(966)[0], reservoir_size=ili_lookback(966)[1]),
}


def get_preset(name: str) -> DatasetPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown dataset {name!r}; choose from {sorted(PRESETS)}") from None


def locate(preset: DatasetPreset, task: str, data_dir, download: bool = False) -> Path:
    """Path of the raw CSV, fetching it first if allowed and possible."""
    fname = preset.file_for(task)
    path = Path(data_dir) / fname
    if not path.exists() and download and preset.download_url:
        path.parent.mkdir(parents=True, exist_ok=True)
        url = preset.download_url + fname
        log.info("downloading %s", url)
        try:
            urllib.request.urlretrieve(url, path)
        except OSError as exc:
            raise DataError(f"download of {url} failed ({exc}); place {fname} at {path}") from exc
    if not path.exists():
        hint = f" (source: {preset.source_url})" if preset.source_url else ""
        raise DataError(f"{preset.name}: expected raw data file at {path}{hint}")
    expected = preset.sha256.get(fname)
    if expected and sha256_file(path) != expected:
        raise DataError(f"{path}: checksum mismatch")
    return path


@dataclass(eq=False)
class PreparedData:
    """Normalized series, split and per-partition windows for one task."""

    name: str
    task: str
    series: TimeSeries
    split: SplitSpec
    scaler: Standardizer
    windows: dict
    source_sha256: str = ""

    @property
    def tau(self) -> int:
        return self.windows["train"].tau

    @property
    def horizon(self) -> int:
        return self.windows["train"].horizon


def prepare(preset: DatasetPreset, task: str, data_dir, tau: int, horizon: int,
            schema: CsvSchema | None = None, download: bool = False) -> PreparedData:
    path = locate(preset, task, data_dir, download)
    schema = schema or CsvSchema(timestamp=preset.timestamp)
    ts = load_csv(path, schema, name=preset.name, period=preset.period)
    if task == "univariate":
        ts = ts.select([preset.univariate[1]])
    split = preset.make_split(ts.T)
    norm, scaler = standardize(ts, split)
    windows = make_windows(norm, split, tau, horizon, target_channels=norm.columns)
    return PreparedData(preset.name, task, norm, split, scaler, windows, sha256_file(path))


def save_prepared(path, data: PreparedData) -> None:
    arrays = {"series": data.series.values, "mean": data.scaler.mean, "std": data.scaler.std}
    for part, wd in data.windows.items():
        arrays[f"anchors_{part}"] = wd.anchors.astype(np.float64)
    meta = {"kind": "windowed-dataset", "name": data.name, "task": data.task,
            "columns": data.series.columns, "period": data.series.period,
            "split": data.split.to_dict(), "tau": data.tau, "horizon": data.horizon,
            "input_idx": list(data.windows["train"].input_idx),
            "target_idx": list(data.windows["train"].target_idx),
            "report": data.series.report, "source_sha256": data.source_sha256}
    write_container(path, arrays, meta)


def load_prepared(path) -> PreparedData:
    arrays, meta = read_container(path)
    if meta.get("kind") != "windowed-dataset":
        raise DataError(f"{path}: not a windowed dataset cache")
    ts = TimeSeries(arrays["series"], meta["columns"], meta["name"], meta["period"],
                    report=meta["report"])
    split = SplitSpec(**meta["split"])
    windows = {
        part: WindowedDataset(ts.values, arrays[f"anchors_{part}"].astype(np.int64), meta["tau"],
                              meta["horizon"], tuple(meta["input_idx"]), tuple(meta["target_idx"]), part)
        for part in ("train", "val", "test")
    }
    return PreparedData(meta["name"], meta["task"], ts, split,
                        Standardizer(arrays["mean"], arrays["std"]), windows, meta["source_sha256"])
