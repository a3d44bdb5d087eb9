"""Run configuration: a JSON file whose keys any command-line flag can override."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .data import PRESETS, get_preset
from .evaluation import DEFAULT_N, DEFAULT_RIDGE, DEFAULT_TAU, R_IN_GRID, RHO_GRID

DATA_DIR_ENV = "RMM_DATA_DIR"


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


@dataclass
class RunConfig:
    dataset: str = "ETTh1"
    task: str = "univariate"
    horizons: list = field(default_factory=lambda: [24])
    tau: int | None = None  # None: dataset preset, else 336
    reservoir_size: int | None = None
    rhos: list = field(default_factory=lambda: list(RHO_GRID))
    r_ins: list = field(default_factory=lambda: list(R_IN_GRID))
    ridge: float = DEFAULT_RIDGE
    variant: str = "rmm"
    data_dir: str = ""
    cache_dir: str = ""
    out_dir: str = "runs"
    refit_with_val: bool = False
    fill_policy: str = "reject"
    top_k: int = 6
    download: bool = False
    workers: int = 1
    model: str = ""
    skip_missing: bool = False

    def __post_init__(self):
        if not self.data_dir:
            self.data_dir = os.environ.get(DATA_DIR_ENV, "data")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**raw)

    def validate(self) -> "RunConfig":
        if self.dataset not in PRESETS:
            raise ConfigError(f"unknown dataset {self.dataset!r}; choose from {sorted(PRESETS)}")
        if self.task not in ("univariate", "multivariate"):
            raise ConfigError(f"task must be univariate or multivariate, got {self.task!r}")
        try:
            get_preset(self.dataset).file_for(self.task)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not self.horizons:
            raise ConfigError("horizon list is empty")
        if any(int(h) < 1 for h in self.horizons):
            raise ConfigError(f"horizons must be positive, got {self.horizons}")
        if not self.rhos or not self.r_ins:
            raise ConfigError("rho and r_in grids must be non-empty")
        if any(not 0 < r < 1 for r in self.rhos):
            raise ConfigError(f"cycle weights must lie in (0, 1): {self.rhos}")
        if any(r <= 0 for r in self.r_ins):
            raise ConfigError(f"input weights must be positive: {self.r_ins}")
        if self.ridge < 0:
            raise ConfigError("ridge coefficient must be >= 0")
        if self.variant not in ("rmm", "lrc"):
            raise ConfigError(f"variant must be rmm or lrc, got {self.variant!r}")
        if self.fill_policy not in ("reject", "ffill"):
            raise ConfigError(f"fill policy must be reject or ffill, got {self.fill_policy!r}")
        if self.tau is not None and self.tau < 1:
            raise ConfigError("tau must be >= 1")
        if self.reservoir_size is not None and self.reservoir_size < 1:
            raise ConfigError("reservoir size must be >= 1")
        if self.top_k < 1:
            raise ConfigError("top-k must be >= 1")
        self.horizons = [int(h) for h in self.horizons]
        return self

    def resolved_tau(self, dataset: str | None = None) -> int:
        if self.tau is not None:
            return int(self.tau)
        return get_preset(dataset or self.dataset).tau or DEFAULT_TAU

    def resolved_n(self, dataset: str | None = None) -> int:
        if self.reservoir_size is not None:
            return int(self.reservoir_size)
        return get_preset(dataset or self.dataset).reservoir_size or DEFAULT_N

    def to_dict(self) -> dict:
        return asdict(self)

    def fingerprint(self) -> str:
        """Hash of every setting that can change results (paths excluded)."""
        d = {k: v for k, v in self.to_dict().items() if k not in ("data_dir", "cache_dir", "out_dir", "workers")}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()
